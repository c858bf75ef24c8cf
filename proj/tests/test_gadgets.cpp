#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "tmb/gadgets.hpp"

using namespace tmb;
using namespace tmb::geometry;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

/// Every (tape, head) with support in [-r, r] and |k| <= r.
std::vector<std::tuple<Tape, std::int64_t, Rational>> samples(int r) {
  std::vector<std::tuple<Tape, std::int64_t, Rational>> out;
  for (const auto& t : oracle::all_tapes(-r, r)) {
    for (std::int64_t k = -r; k <= r; ++k) out.emplace_back(t, k, oracle::code_value(t, k));
  }
  return out;
}

Tape with_cell(const Tape& t, std::int64_t k, int s) {
  auto ones = t.ones();
  if (s) ones.insert(k);
  else ones.erase(k);
  return Tape(ones);
}

/// Exact intersection of the ray p + t*d with the line through segment s.
Point hit_line(const Point& p, const Point& d, const Segment& s) {
  const Point e = s.b - s.a;
  const Rational den = d.x * e.y - d.y * e.x;
  const Rational t = ((s.a.x - p.x) * e.y - (s.a.y - p.y) * e.x) / den;
  return {p.x + t * d.x, p.y + t * d.y};
}

const Segment& seg(const Wall& w) { return std::get<Segment>(w.shape); }

}  // namespace

TEST_CASE("split gadget examples") {
  auto split = build_split_gadget(1);
  auto a = split->forward(0, q(1, 3));
  REQUIRE(a);
  CHECK(a->port == 0);
  CHECK(a->value == q(-5, 3));
  auto b = split->forward(0, q(5, 9));
  REQUIRE(b);
  CHECK(b->port == 1);
  CHECK(b->value == q(23, 9));
  auto rw = build_split_gadget(1, {1, 1})->forward(0, q(1, 3));
  REQUIRE(rw);
  CHECK(rw->port == 0);
  CHECK(rw->value == q(-13, 9));
  CHECK_FALSE(split->forward(0, q(1, 2)));  // gap between blocks
  CHECK_THROWS_AS(build_split_gadget(70), encoding::ResourceLimit);
}

TEST_CASE("split transfer matches head read and rewrite") {
  for (std::array<Symbol, 2> rule : {std::array<Symbol, 2>{0, 1}, {1, 1}, {0, 0}, {1, 0}}) {
    auto split = build_split_gadget(3, rule);
    auto merge = build_merge_gadget(split);
    for (const auto& [t, k, x] : samples(3)) {
      const int s = t.read(k);
      auto out = split->forward(0, x);
      REQUIRE(out);
      CHECK(out->port == s);
      const Rational expect = oracle::code_value(with_cell(t, k, rule[s]), k) + (s == 0 ? -2 : 2);
      CHECK(out->value == expect);
      auto back = merge->forward(out->port, out->value);
      REQUIRE(back);
      CHECK(back->value == x);
      CHECK(back->port == 0);
    }
  }
}

TEST_CASE("merge examples and guard") {
  auto merge = build_merge_gadget(build_split_gadget(0));
  CHECK(merge->forward(0, q(-5, 3))->value == q(1, 3));
  CHECK(merge->forward(1, q(23, 9))->value == q(5, 9));
  CHECK_FALSE(merge->forward(1, q(-5, 3)));
  CHECK(merge->transfer(0).injective());

  SepBlock b1{0, "a", q(0), q(1, 2), 0, q(0)};
  SepBlock b2{0, "b", q(1), q(3, 2), 0, q(-1)};
  auto clash = std::make_shared<IntervalSplit>(std::vector<SepBlock>{b1, b2}, "clash");
  CHECK_THROWS_AS(build_merge_gadget(clash), ConstructionError);
}

TEST_CASE("parallel walls and rewrite angle") {
  for (std::array<Symbol, 2> rule : {std::array<Symbol, 2>{0, 1}, {1, 0}}) {
    auto split = build_split_gadget(3, rule);
    split->for_each_block(3, [&](const SepBlock& b) {
      auto bw = split->walls_of(b);
      const auto& p = seg(bw.primary);
      const auto& r = seg(bw.ret);
      const Rational sp = (p.b.y - p.a.y) / (p.b.x - p.a.x);
      const Rational sr = (r.b.y - r.a.y) / (r.b.x - r.a.x);
      CHECK(sp == sr);
      const Rational h = encoding::block_length(b.k).to_rational();
      CHECK(abs(b.disp) == (rule[b.side] == b.side ? q(0) : 2 * h));
      const Rational want = Rational(b.side == 0 ? -1 : 1) / (1 + (rule[b.side] == b.side ? q(0) : h));
      CHECK(sp == want);
    });
  }
}

TEST_CASE("exact reflection through primary and return walls") {
  for (std::array<Symbol, 2> rule : {std::array<Symbol, 2>{0, 1}, {1, 1}, {0, 0}}) {
    auto split = build_split_gadget(2, rule);
    for (const auto& [t, k, x] : samples(2)) {
      auto b = split->locate(x);
      REQUIRE(b);
      auto bw = split->walls_of(*b);
      const Point up{0, 1};
      const Point p1 = hit_line({x, 0}, up, seg(bw.primary));
      const Point t1 = seg(bw.primary).b - seg(bw.primary).a;
      const Point d1 = reflect(up, t1);
      const Point p2 = hit_line(p1, d1, seg(bw.ret));
      const Point d2 = reflect(d1, seg(bw.ret).b - seg(bw.ret).a);
      CHECK(d2.x == 0);
      CHECK(d2.y > 0);
      CHECK(p2.x == split->forward(0, x)->value);
      // hit points lie inside the finite walls
      CHECK(seg(bw.primary).a.x < p1.x);
      CHECK(p1.x < seg(bw.primary).b.x);
      CHECK(seg(bw.ret).a.x < p2.x);
      CHECK(p2.x < seg(bw.ret).b.x);
    }
  }
}

TEST_CASE("shift gadget examples") {
  CHECK(build_shift_gadget(Regime::High, 1, 4)->forward(0, q(1, 3))->value == q(7, 9));
  CHECK(build_shift_gadget(Regime::Low, 1, 4)->forward(0, q(1, 9))->value == q(1, 3));
  auto inv = build_shift_gadget(Regime::High, -1, 4);
  CHECK(inv->forward(0, q(7, 9))->value == q(1, 3));
  CHECK(inv->backward(0, q(1, 3))->value == q(7, 9));
  CHECK_FALSE(build_shift_gadget(Regime::High, 1, 4)->forward(0, q(1, 9)));
  CHECK_THROWS_AS(build_shift_gadget(Regime::High, -1, 0), ConstructionError);
}

TEST_CASE("shift gadgets realise the head shift") {
  const int K = 3;
  for (int eps : {1, -1}) {
    auto lo = build_shift_gadget(Regime::Low, eps, K);
    auto hi = build_shift_gadget(Regime::High, eps, K);
    for (const auto& [t, k, x] : samples(K)) {
      const auto& g = (eps == 1 ? k < 0 : k <= 0) ? lo : hi;
      auto out = g->forward(0, x);
      REQUIRE(out);
      CHECK(out->value == oracle::code_value(t, k + eps));
      CHECK(g->backward(0, out->value)->value == x);
    }
  }
}

TEST_CASE("confocal pair traced in long double") {
  using ld = long double;
  for (auto [r, eps] : {std::pair{Regime::Low, 1}, {Regime::High, 1}, {Regime::Low, -1}, {Regime::High, -1}}) {
    auto g = build_shift_gadget(r, eps, 3);
    auto ws = g->walls();
    const auto& p1 = std::get<ParabolaArc>(ws[0].shape);
    const auto& p2 = std::get<ParabolaArc>(ws[1].shape);
    const auto& in = g->inputs()[0];
    const auto& out = g->outputs()[0];
    for (int i = 0; i <= 8; ++i) {
      const Rational u = in.lo + (in.hi - in.lo) * Rational(i, 8);
      const ld x1 = in.at(u).x.convert_to<ld>();
      // P1: y = 1 - x^2/4; the vertical ray is reflected through the focus (origin)
      const ld y1 = 1 - x1 * x1 / 4;
      ld nx = -x1 / 2, ny = -1;  // gradient of y + x^2/4
      const ld nn = std::sqrt(nx * nx + ny * ny);
      nx /= nn;
      ny /= nn;
      ld dx = -2 * ny * nx, dy = 1 - 2 * ny * ny;
      CHECK(std::fabs(dx * y1 - dy * x1) < 1e-15L);  // heading to the focus
      // P2: y = x^2/(4a) - a, solve along the ray
      const ld a = p2.p.convert_to<ld>();
      const ld A = dx * dx / (4 * a), B = 2 * x1 * dx / (4 * a) - dy, C = x1 * x1 / (4 * a) - a - y1;
      const ld t = (-B + std::sqrt(B * B - 4 * A * C)) / (2 * A);
      const ld x2 = x1 + t * dx, y2 = y1 + t * dy;
      CHECK(x2 > p2.xlo.convert_to<ld>());
      CHECK(x2 < p2.xhi.convert_to<ld>());
      nx = x2 / (2 * a);
      ny = -1;
      const ld m = std::sqrt(nx * nx + ny * ny);
      nx /= m;
      ny /= m;
      const ld dot = dx * nx + dy * ny;
      const ld ox = dx - 2 * dot * nx, oy = dy - 2 * dot * ny;
      CHECK(std::fabs(ox) < 1e-15L);
      CHECK(oy > 0);
      const ld v = g->forward(0, u)->value.convert_to<ld>();
      CHECK(std::fabs(out.at(g->forward(0, u)->value).x.convert_to<ld>() - x2) < 1e-15L);
      (void)v;
      (void)y2;
      (void)p1;
    }
  }
}

TEST_CASE("turn gadget") {
  auto left = build_turn_gadget(1);
  CHECK(left->outputs()[0].travel == kLeft);
  CHECK(left->forward(0, q(3, 2))->value == q(3, 2));
  const auto& m = left->mirror();
  CHECK((m.b.y - m.a.y) / (m.b.x - m.a.x) == q(-1));
  // the ray at x = u meets the mirror and leaves at the output's value u
  const Rational u = q(1, 3);
  const Point h = hit_line({u, 0}, {0, 1}, m);
  CHECK(left->outputs()[0].value_of(h) == u);

  auto back = TurnGadget(left->outputs()[0], kUp, q(6), q(-4), q(4), "t2");
  CHECK(back.outputs()[0].travel == kUp);
  CHECK(back.outputs()[0].axis == kRight);
  CHECK(back.forward(0, u)->value == u);

  CHECK_THROWS_AS(build_turn_gadget(-1, q(-5), q(1)), ConstructionError);
}

TEST_CASE("separation audit") {
  auto r0 = check_separation(0);
  REQUIRE_FALSE(r0.empty());
  for (const auto& r : r0) CHECK(r.pass);

  auto r3 = check_separation(3);
  std::int64_t levels = 0;
  for (const auto& r : r3) {
    CHECK(r.pass);
    CHECK(r.min_slack > 0);
    if (r.k == r.k2) ++levels;
  }
  CHECK(levels == 7);

  // a primary wall moved by 3^-(3k+1) collides
  WallPerturbation mut{1, 0, inv_pow3(4)};
  auto bad = check_separation(3, 64, mut);
  bool failed = false;
  for (const auto& r : bad) {
    if (!r.pass) {
      failed = true;
      CHECK(r.min_slack < 0);
    }
  }
  CHECK(failed);
}
