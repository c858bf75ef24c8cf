#include <array>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tmb/encoding.hpp"

using namespace tmb;
using namespace tmb::encoding;

namespace {

TernaryRational tr(std::int64_t n, unsigned e) { return TernaryRational::from_parts(n, e); }

Tape random_tape(std::mt19937_64& rng, int lo, int hi) {
  std::set<std::int64_t> ones;
  std::bernoulli_distribution coin(0.5);
  for (int i = lo; i <= hi; ++i) {
    if (coin(rng)) ones.insert(i);
  }
  return Tape(ones);
}

}  // namespace

TEST_CASE("encode_tape") {
  CHECK(encode_tape(Tape()) == TernaryRational(0));
  CHECK(encode_tape(Tape({0})) == tr(2, 1));
  CHECK(encode_tape(Tape({-1, 1})) == tr(8, 3));
  for (const auto& t : oracle::all_tapes(-3, 3)) {
    const auto x = encode_tape(t);
    CHECK(x.to_rational() == oracle::tape_value(t));
    // Digits are all 0 or 2.
    CHECK(x.ternary_digits().find('1') == std::string::npos);
  }
}

TEST_CASE("tau") {
  CHECK(tau(0, 0) == tr(1, 1));
  CHECK(tau(0, 1) == tr(2, 1));
  CHECK(tau(-1, 0) == tr(1, 2));
  CHECK(tau(-1, 1) == tr(2, 2));
  CHECK(tau(1, 0) == tr(7, 2));
  CHECK(tau(1, 1) == tr(8, 2));
  CHECK_THROWS_AS(tau(0, tr(4, 1)), std::domain_error);
  CHECK_THROWS_AS(tau(0, -1), std::domain_error);
  for (std::int64_t k = -6; k <= 6; ++k) {
    const auto x = tr(5, 3);
    CHECK(tau(k, x).to_rational() == oracle::tau_value(k, x.to_rational()));
    CHECK(tau_inverse(k, tau(k, x)) == x);
  }
}

TEST_CASE("encode_state") {
  CHECK(encode_state(Tape(), 0).value == tr(1, 1));
  CHECK(encode_state(Tape({0}), 0).value == tr(5, 2));
  CHECK(encode_state(Tape(), 1).value == tr(7, 2));
  const auto p = encode_state(Tape({3}), -2);
  REQUIRE(p.decoded);
  CHECK(p.decoded->head == -2);
}

TEST_CASE("decode") {
  const auto d = decode(tr(5, 2));
  REQUIRE(d);
  CHECK(d->tape == Tape({0}));
  CHECK(d->head == 0);
  CHECK_FALSE(decode(Rational(1, 2)));
  CHECK_FALSE(decode(Rational(3, 10)));
  CHECK_FALSE(decode(tr(1, 2) + tr(1, 4)));  // inside I_-1, preimage has a digit 1
  CHECK_FALSE(decode(tr(5, 2).times3()));  // outside [0,1]
  CHECK_FALSE(decode(tr(7, 3)));            // gap between I_-1 and I_0
  CHECK_FALSE(decode(TernaryRational(0)));
  CHECK_FALSE(decode(TernaryRational(1)));
  CHECK_FALSE(decode(tau(0, 1)));           // preimage 1 = 0.222... has infinite support
  const auto far = decode(tr(1, 4));        // tau_-3(0)
  REQUIRE(far);
  CHECK(far->head == -3);
  CHECK(far->tape.empty());
}

TEST_CASE("round trip decode(encode_state) exhaustively for support in [-4,4], |k| <= 4") {
  for (const auto& t : oracle::all_tapes(-4, 4)) {
    for (std::int64_t k = -4; k <= 4; ++k) {
      const auto x = encode_state(t, k);
      CHECK(x.value.to_rational() == oracle::code_value(t, k));
      const auto d = decode(x.value);
      REQUIRE(d);
      CHECK(d->tape == t);
      CHECK(d->head == k);
    }
  }
}

TEST_CASE("round trip on random wide tapes") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> head(-30, 30);
  for (int i = 0; i < 300; ++i) {
    const auto t = random_tape(rng, -25, 25);
    const std::int64_t k = head(rng);
    const auto d = decode(encode_state(t, k).value);
    REQUIRE(d);
    CHECK(*d == Decoded{t, k});
  }
}

TEST_CASE("head intervals: length, disjointness, order, mirror symmetry") {
  for (std::int64_t k = -12; k <= 12; ++k) {
    const auto I = head_interval(k);
    CHECK(I.hi - I.lo == tr(1, static_cast<unsigned>(1 + (k < 0 ? -k : k))));
    if (k < 12) {
      CHECK(I.hi < head_interval(k + 1).lo);
    }
    if (k >= 1) {
      CHECK(head_interval(-k).lo + I.hi == TernaryRational(1));
    }
  }
}

TEST_CASE("shift_point") {
  CHECK(shift_point(encode_state(Tape(), 0), 1).value == tr(7, 2));
  CHECK(shift_point(encode_state(Tape(), -1), 1).value == tr(1, 1));
  CHECK(shift_point(EncodedPoint{tr(7, 2), std::nullopt}, -1).value == tr(1, 1));
  CHECK_THROWS_AS(shift_point(EncodedPoint{tr(7, 3), std::nullopt}, 1), NotACode);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto t = random_tape(rng, -6, 6);
    const std::int64_t k = static_cast<std::int64_t>(i % 13) - 6;
    for (int eps : {-1, 1}) {
      const auto moved = shift_point(EncodedPoint{encode_state(t, k).value, std::nullopt}, eps);
      CHECK(moved.value == encode_state(t, k + eps).value);
      CHECK(moved.decoded->head == k + eps);
    }
  }
}

TEST_CASE("read_digit") {
  CHECK(read_digit(EncodedPoint{tr(5, 2), std::nullopt}) == 1);
  CHECK(read_digit(encode_state(Tape(), 0)) == 0);
  CHECK(read_digit(EncodedPoint{encode_state(Tape({-1}), -1).value, std::nullopt}) == 1);
  CHECK_THROWS_AS(read_digit(EncodedPoint{tr(7, 3), std::nullopt}), NotACode);
}

TEST_CASE("rewrite_point") {
  CHECK(rewrite_point(EncodedPoint{tr(5, 2), std::nullopt}, 0).value == tr(1, 1));
  CHECK(rewrite_point(encode_state(Tape(), 0), 0).value == tr(1, 1));
  CHECK(rewrite_point(encode_state(Tape(), 0), 1).value == tr(5, 2));
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto t = random_tape(rng, -6, 6);
    const std::int64_t k = static_cast<std::int64_t>(i % 13) - 6;
    const auto x = EncodedPoint{encode_state(t, k).value, std::nullopt};
    for (Symbol s : {0, 1}) {
      Tape expected = t;
      expected.write(k, s);
      const auto y = rewrite_point(x, s);
      CHECK(y.value == encode_state(expected, k).value);
      const TernaryRational delta = y.value - x.value;
      if (s == t.read(k)) {
        CHECK(delta == TernaryRational(0));
      } else if (k >= 0) {
        const auto mag = tr(2, static_cast<unsigned>(3 * k + 2));
        CHECK(delta == (s == 1 ? mag : -mag));
      } else {
        const auto mag = tr(2, static_cast<unsigned>(-3 * k + 1));
        CHECK(delta == (s == 1 ? mag : -mag));
      }
    }
  }
}

TEST_CASE("cantor_blocks") {
  const auto z = cantor_blocks(0, 0);
  REQUIRE(z.size() == 1);
  CHECK(z[0].lo == tr(1, 1));
  CHECK(z[0].hi == tr(4, 2));
  const auto o = cantor_blocks(0, 1);
  REQUIRE(o.size() == 1);
  CHECK(o[0].lo == tr(5, 2));
  CHECK(o[0].hi == tr(2, 1));
  const auto k1 = cantor_blocks(1, 0);
  REQUIRE(k1.size() == 4);
  for (const auto& b : k1) CHECK(b.hi - b.lo == tr(1, 5));
  for (std::int64_t k = 2; k <= 4; ++k) CHECK(cantor_blocks(k, 1).size() == (1u << (2 * k)));
  for (std::int64_t k = -4; k <= -1; ++k) {
    const auto bs = cantor_blocks(k, 0);
    CHECK(bs.size() == (1u << (-2 * k - 1)));
    for (const auto& b : bs) CHECK(b.hi - b.lo == tr(1, static_cast<unsigned>(-3 * k + 1)));
  }
  CHECK_THROWS_AS(cantor_blocks(5, 0, 4), ResourceLimit);
  CHECK_THROWS_AS(cantor_blocks(40, 0), ResourceLimit);
}

TEST_CASE("every code lies in exactly the block named by its prefix") {
  for (std::int64_t k = -3; k <= 3; ++k) {
    const std::array<std::vector<CantorBlock>, 2> blocks{cantor_blocks(k, 0), cantor_blocks(k, 1)};
    for (const auto& t : oracle::all_tapes(-3, 3)) {
      const auto x = encode_state(t, k).value;
      const Symbol s = t.read(k);
      const auto prefix = head_prefix(t, k);
      int hits = 0;
      for (Symbol b : {0, 1}) {
        for (const auto& blk : blocks[static_cast<std::size_t>(b)]) {
          if (blk.lo <= x && x <= blk.hi) {
            ++hits;
            CHECK(b == s);
            CHECK(blk.prefix == prefix);
          }
        }
      }
      CHECK(hits == 1);
    }
  }
}
