#include <regex>

#include "doctest.h"
#include "oracles.hpp"
#include "tmb/serialize.hpp"

using namespace tmb;
using namespace tmb::io;

TEST_CASE("exact strings") {
  CHECK(exact_str(Rational(5, 9)) == "5/3^2");
  CHECK(exact_str(Rational(1, 2)) == "1/2");
  CHECK(exact_str(Rational(-4)) == "-4/3^0");
  for (const Rational& r : {Rational(5, 9), Rational(-7, 10), Rational(3), Rational(0), Rational(-2, 81)}) {
    CHECK(parse_exact(exact_str(r)) == r);
  }
}

TEST_CASE("fixed") {
  CHECK(fixed(Rational(1, 3), 12) == "0.333333333333");
  CHECK(fixed(Rational(2, 3), 12) == "0.666666666667");
  CHECK(fixed(Rational(-2, 3), 3) == "-0.667");
  CHECK(fixed(Rational(5, 2), 0) == "3");
  CHECK(fixed(Rational(-1, 3), 0) == "0");
  CHECK(fixed(Rational(1, 4), 12) == "0.25");
  CHECK(fixed(Rational(-1, 1000000), 3) == "0");
  CHECK(fixed(Rational(12), 4) == "12");
}

TEST_CASE("table round trip") {
  for (const char* name : {"rev_move.tm", "flipper.tm", "looper.tm"}) {
    INFO(name);
    const auto t = table::compile(oracle::fixture(name), 3);
    const std::string text = serialize_table(t);
    CHECK(text == serialize_table(table::compile(oracle::fixture(name), 3)));
    const auto back = load_table(text);
    CHECK(serialize_table(back) == text);
    CHECK(back.K() == 3);
    CHECK(back.gadgets().size() == t.gadgets().size());
  }
}

TEST_CASE("tampered table files are rejected") {
  const auto t = table::compile(oracle::fixture("rev_move.tm"), 3);
  auto doc = table_json(t);
  CHECK_THROWS_AS(load_table("{"), TableFormatError);
  CHECK_THROWS_AS(load_table("{}"), TableFormatError);
  auto moved = doc;
  moved["scene"][0]["segment"][0][0] = "1/3^5";
  CHECK_THROWS_AS(load_table(moved.dump()), TableFormatError);
  auto hashed = doc;
  hashed["meta"]["machine_hash"] = "0";
  CHECK_THROWS_AS(load_table(hashed.dump()), TableFormatError);
  auto fmt = doc;
  fmt["meta"]["format"] = "other";
  CHECK_THROWS_AS(load_table(fmt.dump()), TableFormatError);
}

TEST_CASE("svg: one path per wall, checkpoints marked, byte stable") {
  const auto t = table::compile(oracle::fixture("flipper.tm"), 3);
  SvgOptions opt;
  opt.traces.push_back({{0, 0}, {Rational(1, 3), 5}});
  const std::string svg = export_svg(t, opt);
  CHECK(svg == export_svg(t, opt));
  const auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto p = svg.find(needle); p != std::string::npos; p = svg.find(needle, p + 1)) ++n;
    return n;
  };
  CHECK(count("<path ") == t.scene(2).size());
  CHECK(count("class=\"checkpoint\"") == t.machine().num_states());
  CHECK(count("<polyline") == 1);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
  // parabolas become quadratic Beziers
  CHECK(count(" Q ") > 0);
  // coordinates carry at most 12 decimals
  CHECK_FALSE(std::regex_search(svg, std::regex("\\.[0-9]{13}")));
}
