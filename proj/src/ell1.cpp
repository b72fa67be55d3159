#include "metriclab/ell1.hpp"

#include <algorithm>

#include "metriclab/lp.hpp"

namespace metriclab {

const char* l1_method_name(L1Method m) { return m == L1Method::ClosedForm ? "closed_form" : "sign_search"; }

namespace {

using Perm = std::array<std::size_t, 4>;

std::array<Rational, 6> distances(const FiniteMetric& m, const Perm& p) {
  return {m(p[0], p[1]), m(p[0], p[2]), m(p[1], p[2]), m(p[0], p[3]), m(p[1], p[3]), m(p[2], p[3])};
}

std::array<RationalVector, 4> place(const std::array<Rational, 6>& c) {
  const Rational z = 0;
  return {RationalVector{z, z, z}, RationalVector{c[0], z, z}, RationalVector{c[1], c[2], z},
          RationalVector{c[3], c[4], c[5]}};
}

L1Embedding4 unpermute(const std::array<RationalVector, 4>& slots, const Perm& p, L1Method method) {
  L1Embedding4 e;
  for (std::size_t k = 0; k < 4; ++k) e.points[p[k]] = slots[k];
  e.permutation = p;
  e.method = method;
  return e;
}

// Variables x1 x2 y2 x3 y3 z3. Each |.| term in the six distances is given a fixed sign.
enum Var { X1, X2, Y2, X3, Y3, Z3 };

std::optional<std::array<Rational, 6>> solve_pattern(const std::array<Rational, 6>& d, unsigned pattern) {
  using C = std::vector<std::pair<std::size_t, Rational>>;
  // Signed linear forms inside the absolute values: x2, x3, y3, x1-x2, x1-x3, x2-x3, y2-y3.
  const std::array<C, 7> terms = {C{{X2, 1}},          C{{X3, 1}},          C{{Y3, 1}},
                                  C{{X1, 1}, {X2, -1}}, C{{X1, 1}, {X3, -1}}, C{{X2, 1}, {X3, -1}},
                                  C{{Y2, 1}, {Y3, -1}}};
  auto sgn_of = [&](std::size_t t) { return ((pattern >> t) & 1) ? Rational(-1) : Rational(1); };
  ConstraintSystem s(6);
  s.add({{X1, 1}}, Relation::Ge, 0);
  s.add({{Y2, 1}}, Relation::Ge, 0);
  s.add({{Z3, 1}}, Relation::Ge, 0);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    C c = terms[t];
    for (auto& [v, a] : c) a *= sgn_of(t);
    s.add(c, Relation::Ge, 0);
  }
  auto abs_term = [&](C& acc, std::size_t t) {
    for (auto [v, a] : terms[t]) acc.emplace_back(v, a * sgn_of(t));
  };
  C e01{{X1, 1}};
  C e02{{Y2, 1}};
  abs_term(e02, 0);
  C e12{{Y2, 1}};
  abs_term(e12, 3);
  C e03{{Z3, 1}};
  abs_term(e03, 1);
  abs_term(e03, 2);
  C e13{{Z3, 1}};
  abs_term(e13, 4);
  abs_term(e13, 2);
  C e23{{Z3, 1}};
  abs_term(e23, 5);
  abs_term(e23, 6);
  s.add(e01, Relation::Eq, d[0]);
  s.add(e02, Relation::Eq, d[1]);
  s.add(e12, Relation::Eq, d[2]);
  s.add(e03, Relation::Eq, d[3]);
  s.add(e13, Relation::Eq, d[4]);
  s.add(e23, Relation::Eq, d[5]);
  FeasibilityResult r = feasible(s);
  if (r.verdict != Verdict::Feasible) return std::nullopt;
  std::array<Rational, 6> out;
  for (std::size_t v = 0; v < 6; ++v) out[v] = r.point[v];
  return out;
}

}  // namespace

Perm four_point_permutation(const FiniteMetric& m) {
  Perm p{0, 1, 2, 3}, best = p;
  Rational best_sum = m(0, 2) + m(1, 3);
  while (std::next_permutation(p.begin(), p.end())) {
    Rational s = m(p[0], p[2]) + m(p[1], p[3]);
    if (s > best_sum) {
      best_sum = s;
      best = p;
    }
  }
  return best;
}

std::array<Rational, 6> four_point_closed_form(const std::array<Rational, 6>& d) {
  static const int A[6][6] = {{2, 0, 0, 0, 0, 0},  {1, 1, -1, 0, 0, 0},  {-1, 1, 1, 0, 0, 0},
                              {1, 0, 0, 1, -1, 0}, {1, -1, 0, 0, -1, 1}, {0, -1, 0, 1, 0, 1}};
  std::array<Rational, 6> x;
  for (std::size_t i = 0; i < 6; ++i) {
    Rational acc = 0;
    for (std::size_t j = 0; j < 6; ++j) acc += A[i][j] * d[j];
    x[i] = acc / 2;
    x[i].canonicalize();
  }
  return x;
}

bool verify_four_point(const L1Embedding4& e, const FiniteMetric& m) {
  if (m.n != 4) return false;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (e.points[i].size() != 3 || e.points[j].size() != 3) return false;
      Rational s = 0;
      for (std::size_t k = 0; k < 3; ++k) s += abs(e.points[i][k] - e.points[j][k]);
      if (s != m(i, j)) return false;
    }
  return true;
}

L1Embedding4 embed_four_point(const FiniteMetric& m, bool allow_semimetric) {
  if (m.n != 4) throw InputError("embed_four_point needs exactly 4 points, got " + std::to_string(m.n));
  AxiomReport rep = validate_metric(m);
  if (!(allow_semimetric ? rep.is_semimetric() : rep.is_metric()))
    throw InputError(std::string("input is not a ") + (allow_semimetric ? "semimetric" : "metric"));

  Perm first = four_point_permutation(m);
  L1Embedding4 e = unpermute(place(four_point_closed_form(distances(m, first))), first, L1Method::ClosedForm);
  if (verify_four_point(e, m)) return e;

  std::vector<Perm> order{first};
  Perm p{0, 1, 2, 3};
  do {
    if (p != first) order.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  for (const Perm& q : order) {
    auto d = distances(m, q);
    for (unsigned pattern = 0; pattern < 128; ++pattern) {
      auto sol = solve_pattern(d, pattern);
      if (!sol) continue;
      L1Embedding4 f = unpermute(place(*sol), q, L1Method::SignSearch);
      if (verify_four_point(f, m)) return f;
      throw InconsistencyError("sign-pattern solution failed verification");
    }
  }
  throw InconsistencyError("no sign pattern embeds the 4-point metric into l1^3");
}

}  // namespace metriclab
