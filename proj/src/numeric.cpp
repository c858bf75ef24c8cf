#include <algorithm>
#include <cmath>
#include <mutex>

#include <boost/multiprecision/mpfr.hpp>

#include "tmb/simulator.hpp"

namespace tmb::sim {

namespace {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>, boost::multiprecision::et_off>;
using geometry::ParabolaArc;
using geometry::Segment;
using geometry::Wall;

// Boost keeps one process-wide default precision; numeric runs take turns.
std::mutex precision_mutex;

class PrecisionScope {
 public:
  explicit PrecisionScope(int digits) : lock_(precision_mutex), old_(Real::default_precision()) {
    Real::default_precision(static_cast<unsigned>(digits));
  }
  ~PrecisionScope() { Real::default_precision(old_); }

 private:
  std::lock_guard<std::mutex> lock_;
  unsigned old_;
};

Real real(const Rational& q) { return Real(q.backend().data()); }

struct DBox {
  double x0, y0, x1, y1;
};

DBox padded(const geometry::BBox& b) {
  auto lo = [](const Rational& r) { const double d = r.convert_to<double>(); return d - 1e-7 - 1e-9 * std::abs(d); };
  auto hi = [](const Rational& r) { const double d = r.convert_to<double>(); return d + 1e-7 + 1e-9 * std::abs(d); };
  return {lo(b.xlo), lo(b.ylo), hi(b.xhi), hi(b.yhi)};
}

struct Vec {
  Real x, y;
};

/// Wall in working precision.
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct NWall {
  std::string key;
  geometry::WallRole role{geometry::WallRole::Mirror};
  bool arc{false};
  Vec a, e;               // segment: a + s e
  Real vx, vy, c, xlo, xhi;  // arc: y = vy + c (x - vx)^2
};

/// Marked segment crossed by beams: a checkpoint or an exit port.
struct Marker {
  std::string id;
  Vec origin;
  geometry::Dir travel, axis;
  Real lo, hi;
};

struct Hit {
  bool marker{false};
  std::size_t index{0};
  Real t;
};

class Scene {
 public:
  Scene(const std::vector<Wall>& walls, const std::vector<geometry::Port>& ports, const std::vector<std::string>& ids) {
    for (const auto& w : walls) {
      NWall n;
      n.key = w.key;
      n.role = w.role;
      if (const auto* s = std::get_if<Segment>(&w.shape)) {
        n.a = {real(s->a.x), real(s->a.y)};
        n.e = {real(s->b.x - s->a.x), real(s->b.y - s->a.y)};
      } else {
        const auto& p = std::get<ParabolaArc>(w.shape);
        n.arc = true;
        n.vx = real(p.vertex.x);
        n.vy = real(p.vertex.y);
        n.c = real(Rational(p.opening) / (4 * p.p));
        n.xlo = real(p.xlo);
        n.xhi = real(p.xhi);
      }
      walls_.push_back(std::move(n));
      boxes_.push_back(padded(geometry::bbox_of(w)));
    }
    // a beam landing on a hull endpoint must not slip past the marker by rounding
    const Real slack = pow(Real(10), -static_cast<int>(Real::default_precision() / 2));
    for (std::size_t i = 0; i < ports.size(); ++i) {
      const auto& p = ports[i];
      markers_.push_back({ids[i], {real(p.origin.x), real(p.origin.y)}, p.travel, p.axis, real(p.lo) - slack,
                          real(p.hi) + slack});
      geometry::BBox b{p.at(p.lo).x, p.at(p.lo).y, p.at(p.lo).x, p.at(p.lo).y};
      b.include(p.at(p.hi));
      boxes_.push_back(padded(b));
    }
    std::vector<std::size_t> idx(boxes_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (!idx.empty()) build(idx, 0, idx.size());
    order_ = std::move(idx);
  }

  const NWall& wall(std::size_t i) const { return walls_[i]; }
  const Marker& marker(std::size_t i) const { return markers_[i]; }
  std::size_t size() const { return walls_.size(); }

  /// Nearest wall or marker hit with t > 0; `skip_wall` / `skip_marker` exclude the current one.
  std::optional<Hit> next(const Vec& o, const Vec& d, std::size_t skip_wall, std::size_t skip_marker,
                          const Real& tie) const {
    std::vector<std::size_t> cand;
    query(o.x.convert_to<double>(), o.y.convert_to<double>(), d.x.convert_to<double>(), d.y.convert_to<double>(), cand);
    std::optional<Hit> best, second;
    for (std::size_t item : cand) {
      std::optional<Real> t;
      const bool is_marker = item >= walls_.size();
      const std::size_t i = is_marker ? item - walls_.size() : item;
      if (is_marker) {
        if (skip_marker == i) continue;
        t = cross_marker(markers_[i], o, d);
      } else {
        if (skip_wall == i) continue;
        t = walls_[i].arc ? hit_arc(walls_[i], o, d) : hit_segment(walls_[i], o, d);
      }
      if (!t) continue;
      Hit h{is_marker, i, *t};
      if (!best || h.t < best->t) {
        second = best;
        best = h;
      } else if (!second || h.t < second->t) {
        second = h;
      }
    }
    if (best && second && !best->marker && !second->marker && second->t - best->t < tie)
      throw TracingDegeneracy("walls " + walls_[best->index].key + " and " + walls_[second->index].key +
                              " are hit within " + tie.str(3, std::ios_base::scientific) + " of each other");
    return best;
  }

 private:
  struct Node {
    DBox box;
    std::size_t first, count;
    int left{-1}, right{-1};
  };

  int build(std::vector<std::size_t>& idx, std::size_t first, std::size_t last) {
    DBox b = boxes_[idx[first]];
    for (std::size_t i = first; i < last; ++i) {
      const DBox& o = boxes_[idx[i]];
      b = {std::min(b.x0, o.x0), std::min(b.y0, o.y0), std::max(b.x1, o.x1), std::max(b.y1, o.y1)};
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({b, first, last - first});
    if (last - first <= 4) return id;
    const bool by_x = b.x1 - b.x0 >= b.y1 - b.y0;
    const std::size_t mid = first + (last - first) / 2;
    std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(first), idx.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx.begin() + static_cast<std::ptrdiff_t>(last), [&](std::size_t a, std::size_t c) {
                       const DBox &p = boxes_[a], &q = boxes_[c];
                       return by_x ? p.x0 + p.x1 < q.x0 + q.x1 : p.y0 + p.y1 < q.y0 + q.y1;
                     });
    const int l = build(idx, first, mid);
    const int r = build(idx, mid, last);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  static bool slab(const DBox& b, double ox, double oy, double dx, double dy) {
    double t0 = 0, t1 = INFINITY;
    auto axis = [&](double o, double d, double lo, double hi) {
      if (std::abs(d) < 1e-300) return lo <= o && o <= hi;
      double a = (lo - o) / d, c = (hi - o) / d;
      if (a > c) std::swap(a, c);
      t0 = std::max(t0, a);
      t1 = std::min(t1, c);
      return t0 <= t1;
    };
    return axis(ox, dx, b.x0, b.x1) && axis(oy, dy, b.y0, b.y1);
  }

  void query(double ox, double oy, double dx, double dy, std::vector<std::size_t>& out) const {
    if (nodes_.empty()) return;
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      if (!slab(n.box, ox, oy, dx, dy)) continue;
      if (n.left < 0) {
        for (std::size_t i = n.first; i < n.first + n.count; ++i) {
          if (slab(boxes_[order_[i]], ox, oy, dx, dy)) out.push_back(order_[i]);
        }
        continue;
      }
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }

  static std::optional<Real> hit_segment(const NWall& w, const Vec& o, const Vec& d) {
    const Real denom = d.x * w.e.y - d.y * w.e.x;
    if (denom == 0) return std::nullopt;
    const Real wx = w.a.x - o.x, wy = w.a.y - o.y;
    const Real t = (wx * w.e.y - wy * w.e.x) / denom;
    if (t <= 0) return std::nullopt;
    const Real s = (wx * d.y - wy * d.x) / denom;
    if (s < 0 || s > 1) return std::nullopt;
    return t;
  }

  static std::optional<Real> hit_arc(const NWall& w, const Vec& o, const Vec& d) {
    const Real X = o.x - w.vx;
    const Real A = w.c * d.x * d.x;
    const Real B = 2 * w.c * X * d.x - d.y;
    const Real C = w.c * X * X + w.vy - o.y;
    std::vector<Real> roots;
    if (A == 0) {
      if (B != 0) roots.push_back(-C / B);
    } else {
      const Real D = B * B - 4 * A * C;
      if (D < 0) return std::nullopt;
      const Real sq = sqrt(D);
      const Real q = -(B + (B < 0 ? -sq : sq)) / 2;
      roots.push_back(q / A);
      if (q != 0) roots.push_back(C / q);
    }
    std::optional<Real> best;
    for (const Real& t : roots) {
      if (t <= 0) continue;
      const Real x = o.x + t * d.x;
      if (x < w.xlo || x > w.xhi) continue;
      if (!best || t < *best) best = t;
    }
    return best;
  }

  static std::optional<Real> cross_marker(const Marker& m, const Vec& o, const Vec& d) {
    const Real along = d.x * m.travel.dx + d.y * m.travel.dy;
    if (along <= 0) return std::nullopt;
    const Real gap = (m.origin.x - o.x) * m.travel.dx + (m.origin.y - o.y) * m.travel.dy;
    const Real t = gap / along;
    if (t <= 0) return std::nullopt;
    const Real u = (o.x + t * d.x - m.origin.x) * m.axis.dx + (o.y + t * d.y - m.origin.y) * m.axis.dy;
    if (u < m.lo || u > m.hi) return std::nullopt;
    return t;
  }

  std::vector<NWall> walls_;
  std::vector<Marker> markers_;
  std::vector<DBox> boxes_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> order_;
};

std::string dec(const Real& r, int digits) { return r.str(static_cast<std::streamsize>(digits), std::ios_base::scientific); }

Vec reflect(const Vec& v, const Vec& n) {
  const Real k = 2 * (v.x * n.x + v.y * n.y) / (n.x * n.x + n.y * n.y);
  return {v.x - k * n.x, v.y - k * n.y};
}

Vec normal_at(const NWall& w, const Vec& p) {
  if (w.arc) return {-2 * w.c * (p.x - w.vx), Real(1)};
  return {-w.e.y, w.e.x};
}

void guard_grazing(const NWall& w, const Vec& d, const Vec& n, double threshold) {
  const Real dot = d.x * n.x + d.y * n.y;
  const Real cosine = abs(dot) / sqrt((d.x * d.x + d.y * d.y) * (n.x * n.x + n.y * n.y));
  if (cosine < threshold) throw TracingDegeneracy("tangential hit on " + w.key);
}

Real transverse(const geometry::Port& port, const Vec& p) {
  return (p.x - real(port.origin.x)) * port.axis.dx + (p.y - real(port.origin.y)) * port.axis.dy;
}

Real tie_threshold(int precision) { return pow(Real(10), -(precision - 5)); }

double magnitude(const Real& r) { return abs(r).convert_to<double>(); }

geometry::Point approx(const Vec& p) {
  return {Rational(p.x.convert_to<double>()), Rational(p.y.convert_to<double>())};
}

std::string describe(const TraceEvent& e) { return to_string(e.kind) + " " + e.id; }

}  // namespace

NumericOutcome run_numeric(const table::BilliardTable& t, const Tape& t0, std::uint64_t budget, const NumericOptions& opt) {
  const RunOutcome sym = run_symbolic(t, t0, budget);
  const Machine& m = t.machine();
  int cap = 0;
  for (const auto& e : sym.trace) {
    if (e.value) {
      if (auto d = encoding::decode(*e.value)) cap = std::max<int>(cap, static_cast<int>(std::abs(d->head)));
    }
  }
  cap = opt.level_cap ? *opt.level_cap : std::min(t.K(), cap + 1);

  PrecisionScope scope(opt.precision);
  NumericOutcome out;
  out.level_cap = cap;
  out.tolerance = std::pow(10.0, -opt.precision / 2.0);

  const auto walls = t.scene(cap);
  std::vector<geometry::Port> ports;
  std::vector<std::string> ids;
  std::map<StateId, std::size_t> marker_of;
  for (StateId q = 0; q < static_cast<StateId>(m.num_states()); ++q) {
    marker_of[q] = ports.size();
    ports.push_back(t.gadgets()[*t.checkpoint(q)].input(0));
    ids.push_back(m.name(q));
  }
  std::map<std::string, geometry::Port> halt_ports;
  for (StateId q : m.halting()) {
    const auto& g = t.gadgets()[*t.halt_wall(q)];
    for (const auto& w : g.walls(0)) halt_ports[w.key] = g.input(0);
  }
  const Scene scene(walls, ports, ids);
  out.walls = walls.size();
  const Real tie = tie_threshold(opt.precision);
  const Real tol = pow(Real(10), -Real(opt.precision) / 2);

  std::vector<const TraceEvent*> expect;
  for (std::size_t i = 1; i < sym.trace.size(); ++i) {
    if (sym.trace[i].kind != EventKind::OutOfRange) expect.push_back(&sym.trace[i]);
  }

  const Rational x0 = *sym.trace.front().value;
  const auto chart = table::iota_chart(t, table::ChartKind::Initial);
  Vec o{real(chart.to_point(x0).x), real(chart.to_point(x0).y)};
  Vec d{Real(chart.port.travel.dx), Real(chart.port.travel.dy)};
  std::size_t skip_wall = kNone, skip_marker = kNone;
  // the launch wall sits right under the initial checkpoint, whose crossing belongs to the launch
  skip_marker = marker_of.at(m.initial());
  if (t.launch()) {
    for (std::size_t i = 0; i < walls.size(); ++i) {
      if (walls[i].role == geometry::WallRole::Launch) skip_wall = i;
    }
  }

  RunOutcome& run = out.run;
  run.trace.push_back({EventKind::Launch, 0, sym.trace.front().id, std::nullopt, dec(o.x, opt.precision) + " " + dec(o.y, opt.precision), 0});
  out.path.push_back(approx(o));

  auto mismatch = [&](std::size_t j, const std::string& got) {
    return PrecisionExhausted("numeric trace diverges at event " + std::to_string(j + 1) + ": expected " +
                              describe(*expect[j]) + ", traced " + got + " (precision " +
                              std::to_string(opt.precision) + " digits)");
  };
  auto check_value = [&](std::size_t j, const Real& u) {
    const Real dev = abs(u - real(*expect[j]->value));
    out.max_deviation = std::max(out.max_deviation, magnitude(dev));
    if (dev > tol)
      throw PrecisionExhausted("deviation " + dec(dev, 3) + " at " + describe(*expect[j]) + " exceeds tolerance at " +
                               std::to_string(opt.precision) + " digits");
  };

  std::size_t bounces = 0;
  for (std::size_t j = 0; j < expect.size(); ++j) {
    if (++bounces > opt.max_bounces) throw PrecisionExhausted("bounce limit reached");
    const auto h = scene.next(o, d, skip_wall, skip_marker, tie);
    if (!h) throw mismatch(j, "escape");
    const Vec p{o.x + h->t * d.x, o.y + h->t * d.y};
    const std::string pos = dec(p.x, opt.precision) + " " + dec(p.y, opt.precision);
    const TraceEvent& want = *expect[j];
    if (h->marker) {
      const Marker& mk = scene.marker(h->index);
      if (want.kind != EventKind::Checkpoint || want.id != mk.id) throw mismatch(j, "checkpoint " + mk.id);
      check_value(j, transverse(ports[h->index], p));
      run.trace.push_back({EventKind::Checkpoint, want.step, mk.id, std::nullopt, pos, 0});
      skip_marker = h->index;
      skip_wall = kNone;
    } else {
      const NWall& w = scene.wall(h->index);
      if (w.role == geometry::WallRole::Halt) {
        if (want.kind != EventKind::HaltBounce) throw mismatch(j, "halt wall " + w.key);
        check_value(j, transverse(halt_ports.at(w.key), p));
        run.trace.push_back({EventKind::HaltBounce, want.step, want.id, std::nullopt, pos, 0});
        out.path.push_back(approx(p));
        break;
      }
      if (want.kind != EventKind::Reflection || want.id != w.key) throw mismatch(j, "reflect " + w.key);
      const Vec n = normal_at(w, p);
      guard_grazing(w, d, n, opt.grazing);
      d = reflect(d, n);
      run.trace.push_back({EventKind::Reflection, want.step, w.key, std::nullopt, pos, 0});
      skip_wall = h->index;
      skip_marker = kNone;
    }
    o = p;
    out.path.push_back(approx(p));
  }
  if (!sym.trace.empty() && sym.trace.back().kind == EventKind::OutOfRange) run.trace.push_back(sym.trace.back());
  run.verdict = sym.verdict;
  run.tape = sym.tape;
  run.head = sym.head;
  run.state = sym.state;
  run.steps = sym.steps;
  run.periodic = sym.periodic;
  run.out_of_range_k = sym.out_of_range_k;
  return out;
}

struct GadgetTracer::Impl {
  const geometry::Gadget& g;
  int precision;
  std::vector<std::string> ids;
  std::optional<Scene> scene;
};

GadgetTracer::GadgetTracer(const geometry::Gadget& g, int precision, int level_cap)
    : impl_(std::make_unique<Impl>(Impl{g, precision, {}, std::nullopt})) {
  PrecisionScope scope(precision);
  for (std::size_t i = 0; i < g.outputs().size(); ++i) impl_->ids.push_back("out" + std::to_string(i));
  impl_->scene.emplace(g.walls(level_cap), g.outputs(), impl_->ids);
}

GadgetTracer::~GadgetTracer() = default;
GadgetTracer::GadgetTracer(GadgetTracer&&) noexcept = default;
GadgetTracer& GadgetTracer::operator=(GadgetTracer&&) noexcept = default;

GadgetTrace GadgetTracer::trace(int in_port, const Rational& x) const {
  const geometry::Gadget& g = impl_->g;
  const int precision = impl_->precision;
  const Scene& scene = *impl_->scene;
  const auto& ids = impl_->ids;
  const auto expect = g.forward(in_port, x);
  if (!expect) throw std::invalid_argument(tmb::to_string(x) + " is outside the gadget's domain");
  PrecisionScope scope(precision);
  const Real tie = tie_threshold(precision);
  const geometry::Port& in = g.inputs().at(static_cast<std::size_t>(in_port));
  Vec o{real(in.at(x).x), real(in.at(x).y)};
  Vec d{Real(in.travel.dx), Real(in.travel.dy)};
  std::size_t skip = kNone;
  GadgetTrace r;
  for (int bounce = 0; bounce < 1000; ++bounce) {
    const auto h = scene.next(o, d, skip, kNone, tie);
    if (!h) throw PrecisionExhausted("ray leaves the gadget without crossing an output port");
    const Vec p{o.x + h->t * d.x, o.y + h->t * d.y};
    if (h->marker) {
      r.out_port = static_cast<int>(h->index);
      const Real u = transverse(g.outputs()[h->index], p);
      r.value = dec(u, precision);
      r.deviation = magnitude(u - real(expect->value));
      if (r.out_port != expect->port) throw PrecisionExhausted("ray leaves through " + ids[h->index] + ", expected out" + std::to_string(expect->port));
      if (r.walls != expect->walls) throw PrecisionExhausted("wall sequence differs from the transfer map");
      return r;
    }
    const NWall& w = scene.wall(h->index);
    r.walls.push_back(w.key);
    const Vec n = normal_at(w, p);
    guard_grazing(w, d, n, 1e-6);
    d = reflect(d, n);
    o = p;
    skip = h->index;
  }
  throw PrecisionExhausted("bounce limit reached inside the gadget");
}

GadgetTrace trace_gadget(const geometry::Gadget& g, int in_port, const Rational& x, int precision, int level_cap) {
  if (!g.forward(in_port, x)) throw std::invalid_argument(tmb::to_string(x) + " is outside the gadget's domain");
  return GadgetTracer(g, precision, level_cap).trace(in_port, x);
}

}  // namespace tmb::sim
