#include "doctest.h"

#include <cmath>

#include "metriclab/interval.hpp"
#include "metriclab/rational.hpp"

using namespace metriclab;

TEST_CASE("parse_rational accepts fractions, integers and decimals") {
  CHECK(parse_rational("3/6") == Rational(1, 2));
  CHECK(parse_rational("-7") == Rational(-7));
  CHECK(parse_rational("0.05") == Rational(1, 20));
  CHECK(parse_rational(" -3.125 ") == Rational(-25, 8));
  CHECK(parse_rational(".5") == Rational(1, 2));
  CHECK(parse_rational("+2/4") == Rational(1, 2));
}

TEST_CASE("parse_rational rejects malformed text") {
  CHECK_THROWS_AS(parse_rational(""), InputError);
  CHECK_THROWS_AS(parse_rational("1/0"), InputError);
  CHECK_THROWS_AS(parse_rational("abc"), InputError);
  CHECK_THROWS_AS(parse_rational("1/-2"), InputError);
  CHECK_THROWS_AS(parse_rational("1e5"), InputError);
  CHECK_THROWS_AS(parse_rational("."), InputError);
}

TEST_CASE("to_string round-trips") {
  for (const char* s : {"0", "1/3", "-22/7", "1000000000000000000000/3"})
    CHECK(to_string(parse_rational(s)) == s);
}

TEST_CASE("approximate_rational recovers small fractions") {
  CHECK(approximate_rational(0.25, 1000) == Rational(1, 4));
  CHECK(approximate_rational(-1.0 / 3.0, 1000) == Rational(-1, 3));
  CHECK(approximate_rational(3.14159265358979, 1000) == Rational(355, 113));
}

TEST_CASE("exact_root detects perfect powers") {
  Rational r;
  CHECK(exact_root(Rational(16, 81), 4, r));
  CHECK(r == Rational(2, 3));
  CHECK_FALSE(exact_root(Rational(2), 2, r));
  CHECK_FALSE(exact_root(Rational(-4), 2, r));
}

TEST_CASE("interval power encloses the true value") {
  Interval s = Interval::power(Rational(2), Rational(1, 2));
  CHECK(s.lower() <= std::sqrt(2.0));
  CHECK(s.upper() >= std::sqrt(2.0));
  CHECK(s.width() < 1e-30);
  Interval sq = s * s;
  CHECK(sq.lower() <= 2.0);
  CHECK(sq.upper() >= 2.0);
}

TEST_CASE("certified_power keeps rational results exact") {
  CHECK(certified_power(Rational(4), Rational(1, 2)).exact == Rational(2));
  CHECK(certified_power(Rational(1, 8), Rational(2, 3)).exact == Rational(1, 4));
  CHECK_FALSE(certified_power(Rational(2), Rational(1, 2)).is_exact());
  CHECK(certified_power(Rational(0), Rational(1, 3)).exact == Rational(0));
}

TEST_CASE("certified comparisons") {
  CertifiedReal root2 = certified_power(Rational(2), Rational(1, 2));
  CHECK(certified_le(root2, CertifiedReal(Rational(3, 2))) == std::optional<bool>(true));
  CHECK(certified_le(CertifiedReal(Rational(3, 2)), root2) == std::optional<bool>(false));
  CHECK(certified_le(root2, root2) == std::nullopt);
  CHECK(root2.sign() == std::optional<int>(1));
}

TEST_CASE("interval division by zero enclosure is rejected") {
  Interval z(Rational(0));
  Interval one(Rational(1));
  CHECK_THROWS_AS(one / z, InputError);
  CHECK(Interval::log2(Rational(8)).lower() <= 3.0);
  CHECK(Interval::log2(Rational(8)).upper() >= 3.0);
}
