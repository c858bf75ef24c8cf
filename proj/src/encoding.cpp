#include "tmb/encoding.hpp"

#include <string>

namespace tmb::encoding {

namespace {

const TernaryRational kZero{0};
const TernaryRational kOne{1};
const TernaryRational kTwo{2};

std::uint64_t abs64(std::int64_t k) { return k < 0 ? static_cast<std::uint64_t>(-k) : static_cast<std::uint64_t>(k); }

std::int64_t cell_of_digit(std::uint64_t i) {
  return (i % 2 == 1) ? static_cast<std::int64_t>((i - 1) / 2) : -static_cast<std::int64_t>(i / 2);
}

// Largest L with 3^L <= n, for n > 0.
unsigned floor_log3(const BigInt& n) {
  unsigned guess = static_cast<unsigned>(mpz_sizeinbase(n.backend().data(), 3));
  // mpz_sizeinbase may overshoot by one.
  while (guess > 0 && pow3(guess - 1) > n) --guess;
  return guess - 1;
}

// m >= 1 with 3^-m <= z <= 2*3^-m, if any.
std::optional<unsigned> scale_index(const TernaryRational& z) {
  if (z.numerator() <= 0) return std::nullopt;
  const unsigned lg = floor_log3(z.numerator());
  if (lg > z.exponent()) return std::nullopt;
  const unsigned m = z.exponent() - lg;
  // z * 3^m = n / 3^lg must lie in [1, 2].
  if (z.numerator() > 2 * pow3(lg)) return std::nullopt;
  if (m == 0) return std::nullopt;
  return m;
}

}  // namespace

std::uint64_t digit_index(std::int64_t cell) {
  return cell >= 0 ? 2 * static_cast<std::uint64_t>(cell) + 1 : 2 * abs64(cell);
}

TernaryRational encode_tape(const Tape& t) {
  TernaryRational x;
  for (auto cell : t.ones()) {
    x += TernaryRational::from_parts(2, static_cast<unsigned>(digit_index(cell)));
  }
  return x;
}

unsigned tau_scale_exponent(std::int64_t k) { return static_cast<unsigned>(1 + abs64(k)); }

TernaryRational tau(std::int64_t k, const TernaryRational& x) {
  if (x < kZero || x > kOne) throw std::domain_error("tau: argument outside [0,1]: " + x.str());
  const unsigned e = tau_scale_exponent(k);
  if (k < 0) return (kOne + x).scaled_down(e);
  return kOne + (x - kTwo).scaled_down(e);
}

TernaryRational tau_inverse(std::int64_t k, const TernaryRational& y) {
  const unsigned e = tau_scale_exponent(k);
  const BigInt s = pow3(e);
  if (k < 0) return y * s - kOne;
  return (y - kOne) * s + kTwo;
}

HeadInterval head_interval(std::int64_t k) { return {k, tau(k, kZero), tau(k, kOne)}; }

EncodedPoint encode_state(const Tape& t, std::int64_t k) {
  return {tau(k, encode_tape(t)), Decoded{t, k}};
}

std::optional<std::int64_t> head_of(const TernaryRational& x) {
  if (x < kZero || x > kOne) return std::nullopt;
  if (const auto m = scale_index(x); m && *m >= 2) return 1 - static_cast<std::int64_t>(*m);
  if (const auto m = scale_index(kOne - x); m && *m >= 1) return static_cast<std::int64_t>(*m) - 1;
  return std::nullopt;
}

std::optional<Decoded> decode(const TernaryRational& x) {
  const auto k = head_of(x);
  if (!k) return std::nullopt;
  const TernaryRational y = tau_inverse(*k, x);
  if (y < kZero || y >= kOne) return std::nullopt;
  // y = n / 3^e with 0 <= n < 3^e: read e ternary digits.
  BigInt n = y.numerator();
  Tape tape;
  for (unsigned i = y.exponent(); i >= 1; --i) {
    const unsigned d = static_cast<unsigned>(n % 3);
    n /= 3;
    if (d == 1) return std::nullopt;
    if (d == 2) tape.write(cell_of_digit(i), 1);
  }
  return Decoded{std::move(tape), *k};
}

std::optional<Decoded> decode(const Rational& x) {
  const auto t = TernaryRational::from_rational(x);
  if (!t) return std::nullopt;
  return decode(*t);
}

namespace {

Decoded require_code(const EncodedPoint& x) {
  if (x.decoded) return *x.decoded;
  auto d = decode(x.value);
  if (!d) throw NotACode("not a code: " + x.value.str());
  return *d;
}

}  // namespace

EncodedPoint shift_point(const EncodedPoint& x, int eps) {
  if (eps != 1 && eps != -1) throw std::invalid_argument("shift must be +-1");
  Decoded d = require_code(x);
  TernaryRational v;
  if (eps == 1) {
    v = d.head < 0 ? x.value.times3() : x.value.div3() + TernaryRational::from_parts(2, 1);
  } else {
    v = d.head - 1 >= 0 ? x.value.times3() - kTwo : x.value.div3();
  }
  d.head += eps;
  return {std::move(v), std::move(d)};
}

Symbol read_digit(const EncodedPoint& x) {
  const Decoded d = require_code(x);
  return d.tape.read(d.head);
}

unsigned block_exponent(std::int64_t k) {
  return static_cast<unsigned>(digit_index(k)) + tau_scale_exponent(k);
}

TernaryRational block_length(std::int64_t k) { return TernaryRational::from_parts(1, block_exponent(k)); }

EncodedPoint rewrite_point(const EncodedPoint& x, Symbol s) {
  Decoded d = require_code(x);
  const Symbol old = d.tape.read(d.head);
  if (old == s) return {x.value, std::move(d)};
  const TernaryRational step = TernaryRational::from_parts(2, block_exponent(d.head));
  TernaryRational v = s == 1 ? x.value + step : x.value - step;
  d.tape.write(d.head, s);
  return {std::move(v), std::move(d)};
}

std::uint64_t block_count(std::int64_t k) {
  const auto prefix = digit_index(k) - 1;
  if (prefix >= 63) return ~std::uint64_t{0};
  return std::uint64_t{1} << prefix;
}

std::vector<Symbol> head_prefix(const Tape& t, std::int64_t k) {
  std::vector<Symbol> out;
  const auto d = digit_index(k);
  for (std::uint64_t i = 1; i < d; ++i) out.push_back(t.read(cell_of_digit(i)));
  return out;
}

std::vector<CantorBlock> cantor_blocks(std::int64_t k, Symbol s, int k_max) {
  if (abs64(k) > static_cast<std::uint64_t>(k_max)) {
    throw ResourceLimit("cantor_blocks: |k|=" + std::to_string(abs64(k)) + " exceeds K_max=" + std::to_string(k_max));
  }
  const std::uint64_t count = block_count(k);
  if (count > (std::uint64_t{1} << 26)) {
    throw ResourceLimit("cantor_blocks: 2^" + std::to_string(digit_index(k) - 1) + " blocks is too many to enumerate");
  }
  const auto d = static_cast<unsigned>(digit_index(k));
  const TernaryRational width = TernaryRational::from_parts(1, d);
  const TernaryRational head_term = TernaryRational::from_parts(2 * s, d);
  std::vector<CantorBlock> out;
  out.reserve(count);
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    CantorBlock b{k, std::vector<Symbol>(d - 1), s, {}, {}};
    TernaryRational x = head_term;
    for (unsigned i = 1; i < d; ++i) {
      const Symbol e = static_cast<Symbol>((bits >> (d - 1 - i)) & 1);
      b.prefix[i - 1] = e;
      if (e) x += TernaryRational::from_parts(2, i);
    }
    b.lo = tau(k, x);
    b.hi = tau(k, x + width);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace tmb::encoding
