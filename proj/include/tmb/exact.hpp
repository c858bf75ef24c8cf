#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace tmb {

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

/// 3^e as an exact integer.
BigInt pow3(unsigned e);
/// 3^-e as an exact rational.
Rational inv_pow3(unsigned e);

/// "p/q", or "p" for integers.
std::string to_string(const Rational& r);
/// Accepts "p/q", "p", or "n/3^e".
Rational parse_rational(std::string_view text);

/// Exact number n / 3^e kept in canonical form (e minimal).
///
/// Every coordinate of the Cantor encoding and of the gadget transfer maps
/// lives in this ring, so arithmetic never rounds.
class TernaryRational {
 public:
  TernaryRational() = default;
  TernaryRational(std::int64_t n) : num_(n) {}  // NOLINT(implicit)
  TernaryRational(BigInt numerator, unsigned exponent);

  /// n / 3^e, canonicalised.
  static TernaryRational from_parts(BigInt numerator, unsigned exponent) {
    return TernaryRational(std::move(numerator), exponent);
  }
  /// Exact conversion; nullopt when the reduced denominator is not a power of 3.
  static std::optional<TernaryRational> from_rational(const Rational& r);
  /// Parses "n/3^e" (or a plain integer).
  static TernaryRational parse(std::string_view text);

  const BigInt& numerator() const { return num_; }
  unsigned exponent() const { return exp_; }

  Rational to_rational() const;
  /// Canonical "n/3^e" serialization.
  std::string str() const;
  /// Base-3 expansion "I.ddd" (the fractional part terminates).
  std::string ternary_digits() const;

  TernaryRational operator-() const { return {-num_, exp_}; }
  friend TernaryRational operator+(const TernaryRational& a, const TernaryRational& b);
  friend TernaryRational operator-(const TernaryRational& a, const TernaryRational& b);
  friend TernaryRational operator*(const TernaryRational& a, const BigInt& k);
  friend TernaryRational operator*(const TernaryRational& a, const TernaryRational& b);
  TernaryRational& operator+=(const TernaryRational& o) { return *this = *this + o; }
  TernaryRational& operator-=(const TernaryRational& o) { return *this = *this - o; }

  TernaryRational times3() const;
  TernaryRational div3() const { return {num_, exp_ + 1}; }
  /// Multiply by 3^-e.
  TernaryRational scaled_down(unsigned e) const { return {num_, exp_ + e}; }

  friend bool operator==(const TernaryRational& a, const TernaryRational& b) {
    return a.exp_ == b.exp_ && a.num_ == b.num_;
  }
  friend std::strong_ordering operator<=>(const TernaryRational& a, const TernaryRational& b);

 private:
  void canonicalize();

  BigInt num_{0};
  unsigned exp_{0};
};

}  // namespace tmb
