#include "tmb/exact.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace tmb {

BigInt pow3(unsigned e) {
  BigInt r;
  mpz_ui_pow_ui(r.backend().data(), 3, e);
  return r;
}

Rational inv_pow3(unsigned e) { return Rational(BigInt(1), pow3(e)); }

std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

BigInt parse_int(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty integer");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw std::invalid_argument("bad integer '" + std::string(s) + "'");
  for (std::size_t j = i; j < s.size(); ++j) {
    if (s[j] < '0' || s[j] > '9') throw std::invalid_argument("bad integer '" + std::string(s) + "'");
  }
  return BigInt(std::string(s[0] == '+' ? s.substr(1) : s));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  const auto den_text = text.substr(slash + 1);
  if (den_text.substr(0, 2) == "3^") {
    return TernaryRational::parse(text).to_rational();
  }
  const BigInt den = parse_int(den_text);
  if (den == 0) throw std::invalid_argument("zero denominator");
  return Rational(parse_int(text.substr(0, slash)), den);
}

TernaryRational::TernaryRational(BigInt numerator, unsigned exponent)
    : num_(std::move(numerator)), exp_(exponent) {
  canonicalize();
}

void TernaryRational::canonicalize() {
  if (num_ == 0) {
    exp_ = 0;
    return;
  }
  while (exp_ > 0) {
    BigInt q, r;
    mpz_tdiv_qr_ui(q.backend().data(), r.backend().data(), num_.backend().data(), 3);
    if (r != 0) break;
    num_ = std::move(q);
    --exp_;
  }
}

std::optional<TernaryRational> TernaryRational::from_rational(const Rational& r) {
  BigInt den = boost::multiprecision::denominator(r);
  unsigned e = 0;
  while (den > 1) {
    BigInt q, rem;
    mpz_tdiv_qr_ui(q.backend().data(), rem.backend().data(), den.backend().data(), 3);
    if (rem != 0) return std::nullopt;
    den = std::move(q);
    ++e;
  }
  return TernaryRational(boost::multiprecision::numerator(r), e);
}

TernaryRational TernaryRational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return {parse_int(text), 0};
  const auto den = text.substr(slash + 1);
  if (den.substr(0, 2) != "3^") {
    auto t = from_rational(parse_rational(text));
    if (!t) throw std::invalid_argument("not a ternary rational: '" + std::string(text) + "'");
    return *t;
  }
  const BigInt e = parse_int(den.substr(2));
  if (e < 0 || e > 1'000'000) throw std::invalid_argument("bad exponent in '" + std::string(text) + "'");
  return {parse_int(text.substr(0, slash)), e.convert_to<unsigned>()};
}

Rational TernaryRational::to_rational() const { return Rational(num_, pow3(exp_)); }

std::string TernaryRational::str() const {
  return num_.str() + "/3^" + std::to_string(exp_);
}

std::string TernaryRational::ternary_digits() const {
  const bool neg = num_ < 0;
  const BigInt mag = neg ? BigInt(-num_) : num_;
  const BigInt scale = pow3(exp_);
  BigInt ip = mag / scale;
  BigInt frac = mag % scale;
  std::string int_digits;
  if (ip == 0) int_digits = "0";
  while (ip > 0) {
    int_digits.push_back(static_cast<char>('0' + static_cast<int>(ip % 3)));
    ip /= 3;
  }
  std::reverse(int_digits.begin(), int_digits.end());
  std::string out = (neg ? "-" : "") + int_digits;
  if (exp_ == 0) return out;
  // frac / 3^exp_ written with exactly exp_ digits.
  std::string fd(exp_, '0');
  for (unsigned i = exp_; i-- > 0;) {
    fd[i] = static_cast<char>('0' + static_cast<int>(frac % 3));
    frac /= 3;
  }
  return out + "." + fd;
}

TernaryRational operator+(const TernaryRational& a, const TernaryRational& b) {
  if (a.exp_ == b.exp_) return {a.num_ + b.num_, a.exp_};
  if (a.exp_ < b.exp_) return {a.num_ * pow3(b.exp_ - a.exp_) + b.num_, b.exp_};
  return {a.num_ + b.num_ * pow3(a.exp_ - b.exp_), a.exp_};
}

TernaryRational operator-(const TernaryRational& a, const TernaryRational& b) { return a + (-b); }

TernaryRational operator*(const TernaryRational& a, const BigInt& k) { return {a.num_ * k, a.exp_}; }

TernaryRational operator*(const TernaryRational& a, const TernaryRational& b) {
  return {a.num_ * b.num_, a.exp_ + b.exp_};
}

TernaryRational TernaryRational::times3() const {
  if (exp_ > 0) return {num_, exp_ - 1};
  return {num_ * 3, 0};
}

std::strong_ordering operator<=>(const TernaryRational& a, const TernaryRational& b) {
  const BigInt lhs = a.exp_ >= b.exp_ ? a.num_ : a.num_ * pow3(b.exp_ - a.exp_);
  const BigInt rhs = b.exp_ >= a.exp_ ? b.num_ : b.num_ * pow3(a.exp_ - b.exp_);
  const int c = lhs.compare(rhs);
  return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

}  // namespace tmb
