#include "doctest.h"

#include <random>

#include "metriclab/ell1.hpp"

using namespace metriclab;

namespace {

FiniteMetric four(int d01, int d02, int d03, int d12, int d13, int d23) {
  RationalMatrix d = zero_matrix(4);
  auto set = [&](int i, int j, int v) { d[i][j] = d[j][i] = v; };
  set(0, 1, d01);
  set(0, 2, d02);
  set(0, 3, d03);
  set(1, 2, d12);
  set(1, 3, d13);
  set(2, 3, d23);
  return FiniteMetric(d);
}

Rational l1(const RationalVector& a, const RationalVector& b) {
  Rational s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += abs(a[k] - b[k]);
  return s;
}

bool isometric(const L1Embedding4& e, const FiniteMetric& m) {
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (l1(e.points[i], e.points[j]) != m(i, j)) return false;
  return true;
}

// Search integer points in [-2,2]^3 with point 0 at the origin.
bool grid_embeds(const FiniteMetric& m) {
  std::vector<RationalVector> grid;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int c = -2; c <= 2; ++c) grid.push_back({a, b, c});
  RationalVector o{0, 0, 0};
  for (auto& p1 : grid) {
    if (l1(o, p1) != m(0, 1)) continue;
    for (auto& p2 : grid) {
      if (l1(o, p2) != m(0, 2) || l1(p1, p2) != m(1, 2)) continue;
      for (auto& p3 : grid)
        if (l1(o, p3) == m(0, 3) && l1(p1, p3) == m(1, 3) && l1(p2, p3) == m(2, 3)) return true;
    }
  }
  return false;
}

FiniteMetric random_four_point(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(1, 100), den(1, 4);
  for (;;) {
    RationalMatrix d = zero_matrix(4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) d[i][j] = d[j][i] = make_rational(num(rng), den(rng));
    FiniteMetric m(d);
    if (validate_metric(m).is_metric()) return m;
  }
}

}  // namespace

TEST_CASE("equilateral four points use the closed form") {
  FiniteMetric m = four(2, 2, 2, 2, 2, 2);
  L1Embedding4 e = embed_four_point(m);
  CHECK(e.method == L1Method::ClosedForm);
  CHECK(e.permutation == std::array<std::size_t, 4>{0, 1, 2, 3});
  CHECK(e.points[0] == RationalVector{0, 0, 0});
  CHECK(e.points[1] == RationalVector{2, 0, 0});
  CHECK(e.points[2] == RationalVector{1, 1, 0});
  CHECK(e.points[3] == RationalVector{1, 0, 1});
  CHECK(isometric(e, m));
}

TEST_CASE("closed form on the 4-cycle is not an embedding") {
  std::array<Rational, 6> d = {1, 2, 1, 1, 2, 1};
  auto x = four_point_closed_form(d);
  CHECK(x == std::array<Rational, 6>{1, 1, 1, 0, -1, 0});
  // point 3 = (0,-1,0), point 2 = (1,1,0): distance 3, not 1
}

TEST_CASE("4-cycle falls back to the sign search") {
  FiniteMetric m = four(1, 2, 1, 1, 2, 1);
  REQUIRE(grid_embeds(m));
  L1Embedding4 e = embed_four_point(m);
  CHECK(e.method == L1Method::SignSearch);
  CHECK(isometric(e, m));
  CHECK(verify_four_point(e, m));
}

TEST_CASE("coincident points need the semimetric flag") {
  FiniteMetric m = four(0, 1, 2, 1, 2, 1);
  CHECK_THROWS_AS(embed_four_point(m), InputError);
  L1Embedding4 e = embed_four_point(m, true);
  CHECK(e.points[0] == e.points[1]);
  CHECK(isometric(e, m));
}

TEST_CASE("bad inputs") {
  CHECK_THROWS_AS(embed_four_point(four(1, 1, 1, 1, 1, 5)), InputError);
  CHECK_THROWS_AS(embed_four_point(FiniteMetric(zero_matrix(3))), InputError);
}

TEST_CASE("small integer metrics agree with a grid search") {
  // Every metric here has an integer l1 realization in [-2,2]^3 relative to point 0.
  int tried = 0;
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b)
      for (int c = 1; c <= 2; ++c)
        for (int d = 1; d <= 2; ++d)
          for (int e = 1; e <= 2; ++e)
            for (int f = 1; f <= 2; ++f) {
              FiniteMetric m = four(a, b, c, d, e, f);
              if (!validate_metric(m).is_metric()) continue;
              ++tried;
              if (grid_embeds(m)) CHECK(isometric(embed_four_point(m), m));
            }
  CHECK(tried > 30);
}

TEST_CASE("random rational four-point metrics embed exactly") {
  std::mt19937_64 rng(404);
  int closed = 0;
  for (int t = 0; t < 1000; ++t) {
    FiniteMetric m = random_four_point(rng);
    L1Embedding4 e = embed_four_point(m);
    REQUIRE(isometric(e, m));
    if (e.method == L1Method::ClosedForm) {
      ++closed;
      const std::array<std::size_t, 4>& p = e.permutation;
      const auto& q1 = e.points[p[1]];
      const auto& q2 = e.points[p[2]];
      const auto& q3 = e.points[p[3]];
      CHECK(q1[0] >= 0);
      CHECK(q2[0] >= 0);
      CHECK(q2[1] >= 0);
      CHECK(q3[0] >= 0);
      CHECK(q3[2] >= 0);
      CHECK(q3[1] <= 0);
    }
  }
  MESSAGE("closed form verified on " << closed << " of 1000");
}

TEST_CASE("the chosen permutation is idempotent") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 300; ++t) {
    FiniteMetric m = random_four_point(rng);
    auto p = four_point_permutation(m);
    RationalMatrix d = zero_matrix(4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) d[i][j] = m(p[i], p[j]);
    CHECK(four_point_permutation(FiniteMetric(d)) == std::array<std::size_t, 4>{0, 1, 2, 3});
  }
}
