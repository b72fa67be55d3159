#include "doctest.h"

#include <random>

#include "metriclab/lp.hpp"

using namespace metriclab;

namespace {

using Coeffs = std::vector<std::pair<std::size_t, Rational>>;

// Fourier-Motzkin elimination over a <= b rows. Independent decision procedure for small systems.
struct Ineq {
  std::vector<Rational> a;
  Rational b;
};

bool fm_feasible(std::vector<Ineq> rows, std::size_t vars) {
  for (std::size_t v = 0; v < vars; ++v) {
    std::vector<Ineq> pos, neg, keep;
    for (auto& r : rows) {
      if (r.a[v] > 0)
        pos.push_back(r);
      else if (r.a[v] < 0)
        neg.push_back(r);
      else
        keep.push_back(r);
    }
    for (auto& p : pos)
      for (auto& n : neg) {
        Ineq c;
        c.a.resize(vars);
        Rational fp = -n.a[v], fn = p.a[v];
        for (std::size_t k = 0; k < vars; ++k) c.a[k] = fp * p.a[k] + fn * n.a[k];
        c.b = fp * p.b + fn * n.b;
        keep.push_back(c);
      }
    rows = std::move(keep);
  }
  for (auto& r : rows)
    if (r.b < 0) return false;
  return true;
}

std::vector<Ineq> as_le(const ConstraintSystem& s) {
  std::vector<Ineq> out;
  for (const auto& row : s.rows) {
    Ineq q;
    q.a.assign(s.vars, Rational(0));
    for (const auto& [v, c] : row.coeffs) q.a[v] = c;
    q.b = row.rhs;
    if (row.rel != Relation::Ge) out.push_back(q);
    if (row.rel != Relation::Le) {
      for (auto& x : q.a) x = -x;
      q.b = -q.b;
      out.push_back(q);
    }
  }
  return out;
}

ConstraintSystem random_system(std::mt19937_64& rng, std::size_t max_vars, std::size_t max_rows) {
  std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_vars)(rng);
  std::size_t m = std::uniform_int_distribution<std::size_t>(1, max_rows)(rng);
  std::uniform_int_distribution<int> coef(-3, 3), rhs(-5, 5), rel(0, 5), den(1, 3);
  ConstraintSystem s(n);
  for (std::size_t r = 0; r < m; ++r) {
    Coeffs c;
    for (std::size_t v = 0; v < n; ++v) {
      int a = coef(rng);
      if (a != 0 && (rng() & 1)) c.emplace_back(v, make_rational(a, den(rng)));
    }
    int k = rel(rng);
    Relation re = k < 3 ? Relation::Le : (k < 5 ? Relation::Ge : Relation::Eq);
    s.add(c, re, make_rational(rhs(rng), den(rng)));
  }
  return s;
}

}  // namespace

TEST_CASE("contradictory bounds give the unit certificate") {
  ConstraintSystem s(1);
  s.add({{0, Rational(1)}}, Relation::Ge, Rational(1), "x>=1");
  s.add({{0, Rational(1)}}, Relation::Le, Rational(0), "x<=0");
  FeasibilityResult r = feasible(s);
  REQUIRE(r.verdict == Verdict::Infeasible);
  CHECK(r.multipliers == RationalVector{Rational(1), Rational(1)});
  CHECK(verify_certificate(s, r).ok);
}

TEST_CASE("simplex point on x+y=1") {
  ConstraintSystem s(2);
  s.add({{0, Rational(1)}, {1, Rational(1)}}, Relation::Eq, Rational(1));
  s.add({{0, Rational(1)}}, Relation::Ge, Rational(0));
  s.add({{1, Rational(1)}}, Relation::Ge, Rational(0));
  FeasibilityResult r = feasible(s);
  REQUIRE(r.verdict == Verdict::Feasible);
  CHECK(r.point[0] + r.point[1] == 1);
  CHECK(r.point[0] >= 0);
  CHECK(r.point[1] >= 0);
}

TEST_CASE("empty system and zero rows") {
  ConstraintSystem s(3);
  CHECK(feasible(s).verdict == Verdict::Feasible);
  s.add({}, Relation::Le, Rational(-1), "0<=-1");
  CHECK(s.trivially_unsatisfiable_rows() == std::vector<std::size_t>{0});
  FeasibilityResult r = feasible(s);
  CHECK(r.verdict == Verdict::Infeasible);
  CHECK(r.multipliers[0] > 0);
}

TEST_CASE("certificate checker rejects bad artifacts") {
  ConstraintSystem s(1);
  s.add({{0, Rational(1)}}, Relation::Ge, Rational(1));
  s.add({{0, Rational(1)}}, Relation::Le, Rational(0));
  FeasibilityResult bad;
  bad.verdict = Verdict::Infeasible;
  bad.multipliers = {Rational(-1), Rational(-1)};
  CHECK_FALSE(verify_certificate(s, bad).ok);
  bad.multipliers = {Rational(1), Rational(2)};
  CHECK_FALSE(verify_certificate(s, bad).ok);
  bad.multipliers = {Rational(0), Rational(0)};
  CHECK_FALSE(verify_certificate(s, bad).ok);
  FeasibilityResult pt;
  pt.point = {Rational(1, 2)};
  CHECK_FALSE(verify_certificate(s, pt).ok);
}

TEST_CASE("equality multipliers may be negative") {
  ConstraintSystem s(1);
  s.add({{0, Rational(1)}}, Relation::Eq, Rational(2));
  s.add({{0, Rational(1)}}, Relation::Ge, Rational(3));
  FeasibilityResult r = feasible(s);
  REQUIRE(r.verdict == Verdict::Infeasible);
  CHECK(r.multipliers[0] < 0);
  CHECK(verify_certificate(s, r).ok);
}

TEST_CASE("duplicate coefficient entries are merged") {
  ConstraintSystem s(1);
  s.add({{0, Rational(1)}, {0, Rational(-1)}}, Relation::Ge, Rational(1));
  CHECK(s.rows[0].coeffs.empty());
  CHECK_THROWS_AS(s.add({{4, Rational(1)}}, Relation::Ge, Rational(0)), InputError);
}

TEST_CASE("exact solver agrees with Fourier-Motzkin on small systems") {
  std::mt19937_64 rng(11);
  int infeasible = 0;
  for (int t = 0; t < 400; ++t) {
    ConstraintSystem s = random_system(rng, 3, 8);
    FeasibilityResult r = feasible(s);
    CHECK(verify_certificate(s, r).ok);
    bool oracle = fm_feasible(as_le(s), s.vars);
    CHECK((r.verdict == Verdict::Feasible) == oracle);
    infeasible += r.verdict == Verdict::Infeasible;
  }
  CHECK(infeasible > 40);
  CHECK(infeasible < 360);
}

TEST_CASE("every exact verdict carries a verifying artifact") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    ConstraintSystem s = random_system(rng, 20, 60);
    FeasibilityResult r = feasible(s);
    CertificateCheck c = verify_certificate(s, r);
    CHECK_MESSAGE(c.ok, c.reason);
  }
}

TEST_CASE("float presolve confirmations always verify and match the exact verdict") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 300; ++t) {
    ConstraintSystem s = random_system(rng, 12, 40);
    FloatLpResult f = feasible_float(s);
    Confirmation c = confirm_exactly(s, f);
    CHECK(verify_certificate(s, c.result).ok);
    CHECK(c.result.verdict == feasible(s).verdict);
  }
}

TEST_CASE("restricted solve finds a certificate on the right support") {
  ConstraintSystem s(2);
  s.add({{0, Rational(1)}}, Relation::Ge, Rational(0));
  s.add({{1, Rational(1)}}, Relation::Ge, Rational(2));
  s.add({{1, Rational(1)}}, Relation::Le, Rational(1));
  FeasibilityResult r = feasible_restricted(s, {false, true, true});
  REQUIRE(r.verdict == Verdict::Infeasible);
  CHECK(r.multipliers[0] == 0);
  CHECK(verify_certificate(s, r).ok);
  CHECK(feasible_restricted(s, {true, false, true}).verdict == Verdict::Feasible);
}

TEST_CASE("relation text") {
  CHECK(parse_relation("<=") == Relation::Le);
  CHECK(parse_relation("=") == Relation::Eq);
  CHECK(std::string(relation_symbol(Relation::Ge)) == ">=");
  CHECK_THROWS_AS(parse_relation("<"), InputError);
}
