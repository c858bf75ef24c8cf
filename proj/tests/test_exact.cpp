#include "doctest.h"
#include "tmb/exact.hpp"

using tmb::Rational;
using tmb::TernaryRational;

TEST_CASE("ternary rationals stay canonical") {
  const auto a = TernaryRational::from_parts(9, 3);  // 9/27 = 1/3
  CHECK(a.numerator() == 1);
  CHECK(a.exponent() == 1);
  CHECK(a.str() == "1/3^1");
  CHECK(TernaryRational::from_parts(0, 7).exponent() == 0);
  CHECK((a + a + a) == TernaryRational(1));
  CHECK(a.times3() == TernaryRational(1));
  CHECK(a.div3() == TernaryRational::from_parts(1, 2));
}

TEST_CASE("ternary arithmetic matches rational arithmetic") {
  for (int n = -20; n <= 20; ++n) {
    for (unsigned e = 0; e < 5; ++e) {
      const auto x = TernaryRational::from_parts(n, e);
      const auto y = TernaryRational::from_parts(7 - n, e + 2);
      CHECK((x + y).to_rational() == x.to_rational() + y.to_rational());
      CHECK((x - y).to_rational() == x.to_rational() - y.to_rational());
      CHECK((x * y).to_rational() == x.to_rational() * y.to_rational());
      CHECK(((x < y) == (x.to_rational() < y.to_rational())));
    }
  }
}

TEST_CASE("conversions and parsing") {
  CHECK(TernaryRational::from_rational(Rational(5, 9)) == TernaryRational::from_parts(5, 2));
  CHECK_FALSE(TernaryRational::from_rational(Rational(1, 2)).has_value());
  CHECK(TernaryRational::parse("5/3^2") == TernaryRational::from_parts(5, 2));
  CHECK(TernaryRational::parse("-7") == TernaryRational(-7));
  CHECK(TernaryRational::parse("4/9") == TernaryRational::from_parts(4, 2));
  CHECK_THROWS(TernaryRational::parse("1/2"));
  CHECK(tmb::parse_rational("-3/6") == Rational(-1, 2));
  CHECK(tmb::parse_rational("2/3^2") == Rational(2, 9));
  CHECK(tmb::to_string(Rational(-1, 2)) == "-1/2");
  CHECK(tmb::to_string(Rational(4)) == "4");
  CHECK_THROWS(tmb::parse_rational("1/0"));
  CHECK_THROWS(tmb::parse_rational("x"));
}

TEST_CASE("ternary digit strings") {
  CHECK(TernaryRational::from_parts(5, 2).ternary_digits() == "0.12");
  CHECK(TernaryRational::from_parts(1, 1).ternary_digits() == "0.1");
  CHECK(TernaryRational(4).ternary_digits() == "11");
  CHECK(TernaryRational::from_parts(-13, 2).ternary_digits() == "-1.11");
}
