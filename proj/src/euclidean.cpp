#include "metriclab/euclidean.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "metriclab/prng.hpp"

namespace metriclab {

namespace {

void require_square_symmetric_exact(const RationalMatrix& m) {
  for (const auto& row : m)
    if (row.size() != m.size()) throw InputError("matrix is not square");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i][i] != 0) throw InputError("matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < m.size(); ++j)
      if (m[i][j] != m[j][i]) throw InputError("matrix is not symmetric");
  }
}

void require_square_symmetric(const RealMatrix& m) {
  for (const auto& row : m)
    if (row.size() != m.size()) throw InputError("matrix is not square");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i][i].sign() != std::optional<int>(0)) throw InputError("matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      const auto& a = m[i][j];
      const auto& b = m[j][i];
      bool same = (a.exact && b.exact) ? *a.exact == *b.exact
                                       : !a.bounds.certainly_lt(b.bounds) && !b.bounds.certainly_lt(a.bounds);
      if (!same) throw InputError("matrix is not symmetric");
    }
  }
}

// R_ab = M_ab - M_an - M_nb + M_nn on the basis e_a - e_n.
template <class T>
std::vector<std::vector<T>> reduce(const std::vector<std::vector<T>>& m) {
  const std::size_t n = m.size();
  const std::size_t k = n == 0 ? 0 : n - 1;
  std::vector<std::vector<T>> r(k, std::vector<T>(k));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) r[a][b] = m[a][b] - m[a][k] - m[k][b] + m[k][k];
  return r;
}

void spectrum(const std::vector<std::vector<double>>& r, CndResult& out) {
  const auto k = static_cast<Eigen::Index>(r.size());
  if (k == 0) return;
  Eigen::MatrixXd a(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) a(i, j) = r[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  out.max_eigenvalue = es.eigenvalues().maxCoeff();
}

struct PivotStep {
  std::size_t p;
  std::vector<std::size_t> rest;
};

RationalVector primitive_integer(RationalVector c) {
  Integer l = 1;
  for (const auto& x : c) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  Integer g = 0;
  for (auto& x : c) {
    x *= l;
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_num_mpz_t());
  }
  if (g != 0)
    for (auto& x : c) x /= g;
  return c;
}

RationalVector extend_sum_zero(const RationalVector& z) {
  RationalVector c(z);
  Rational s = 0;
  for (const auto& x : z) s += x;
  c.push_back(-s);
  return c;
}

// Exact LDL search for z with z^T A z > 0.
std::optional<RationalVector> exact_positive_direction(RationalMatrix a) {
  const std::size_t k = a.size();
  std::vector<std::size_t> active(k);
  std::iota(active.begin(), active.end(), 0);
  std::vector<PivotStep> steps;
  std::vector<RationalVector> pivot_rows;
  RationalVector z(k, Rational(0));
  bool found = false;
  while (!active.empty() && !found) {
    auto pos = std::find_if(active.begin(), active.end(), [&](std::size_t i) { return a[i][i] > 0; });
    if (pos != active.end()) {
      z[*pos] = 1;
      found = true;
      break;
    }
    auto neg = std::find_if(active.begin(), active.end(), [&](std::size_t i) { return a[i][i] < 0; });
    if (neg == active.end()) {
      for (std::size_t x = 0; x < active.size() && !found; ++x)
        for (std::size_t y = x + 1; y < active.size() && !found; ++y) {
          const Rational& v = a[active[x]][active[y]];
          if (v != 0) {
            z[active[x]] = 1;
            z[active[y]] = sgn(v);
            found = true;
          }
        }
      break;
    }
    std::size_t p = *neg;
    std::vector<std::size_t> rest;
    for (std::size_t i : active)
      if (i != p) rest.push_back(i);
    pivot_rows.push_back(a[p]);
    const Rational app = a[p][p];
    for (std::size_t r : rest) {
      if (a[r][p] == 0) continue;
      Rational f = a[r][p] / app;
      for (std::size_t s : rest) a[r][s] -= f * a[p][s];
    }
    steps.push_back({p, rest});
    active = std::move(rest);
  }
  if (!found) return std::nullopt;
  for (std::size_t t = steps.size(); t-- > 0;) {
    const auto& row = pivot_rows[t];
    Rational acc = 0;
    for (std::size_t j : steps[t].rest) acc += row[j] * z[j];
    z[steps[t].p] = -acc / row[steps[t].p];
  }
  return z;
}

CndResult finish_exact(const RationalMatrix& m, const RationalMatrix& r, std::optional<RationalVector> z) {
  CndResult out;
  out.exact = true;
  std::vector<std::vector<double>> rd(r.size(), std::vector<double>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r.size(); ++j) rd[i][j] = r[i][j].get_d();
  spectrum(rd, out);
  if (!z) return out;
  RationalVector c = primitive_integer(extend_sum_zero(*z));
  CertifiedReal value = quadratic_form(m, c);
  if (!value.exact || *value.exact <= 0) throw InconsistencyError("CND witness does not certify");
  out.is_cnd = false;
  out.witness = std::move(c);
  out.form_value = std::move(value);
  return out;
}

}  // namespace

CertifiedReal quadratic_form(const RationalMatrix& m, const RationalVector& c) {
  if (c.size() != m.size()) throw InputError("witness length does not match matrix size");
  Rational sum = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (c[i] == 0) continue;
    for (std::size_t j = 0; j < m.size(); ++j) sum += c[i] * c[j] * m[i][j];
  }
  return CertifiedReal(sum);
}

CertifiedReal quadratic_form(const RealMatrix& m, const RationalVector& c) {
  if (c.size() != m.size()) throw InputError("witness length does not match matrix size");
  unsigned prec = m.empty() ? kDefaultPrecisionBits : m[0][0].bounds.precision();
  CertifiedReal sum(Rational(0), prec);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (c[i] == 0) continue;
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (c[j] == 0) continue;
      sum = sum + CertifiedReal(Rational(c[i] * c[j]), prec) * m[i][j];
    }
  }
  return sum;
}

CndResult is_cnd(const RationalMatrix& m) {
  require_square_symmetric_exact(m);
  RationalMatrix r = reduce(m);
  return finish_exact(m, r, exact_positive_direction(r));
}

CndResult is_cnd(const RealMatrix& m, double tolerance) {
  require_square_symmetric(m);
  bool all_exact = true;
  for (const auto& row : m)
    for (const auto& x : row) all_exact = all_exact && x.is_exact();
  unsigned prec = m.empty() ? kDefaultPrecisionBits : m[0][0].bounds.precision();
  if (all_exact) {
    RationalMatrix q = zero_matrix(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) q[i][j] = *m[i][j].exact;
    CndResult out = is_cnd(q);
    out.precision_bits = prec;
    return out;
  }

  const std::size_t n = m.size();
  const std::size_t k = n - 1;
  std::vector<std::vector<Interval>> a(k, std::vector<Interval>(k, Interval(prec)));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      a[i][j] = m[i][j].bounds - m[i][k].bounds - m[k][j].bounds + m[k][k].bounds;

  CndResult out;
  out.exact = false;
  out.precision_bits = prec;
  {
    std::vector<std::vector<double>> rd(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) rd[i][j] = a[i][j].midpoint();
    spectrum(rd, out);
  }

  std::vector<std::size_t> active(k);
  std::iota(active.begin(), active.end(), 0);
  std::vector<PivotStep> steps;
  std::vector<std::vector<Interval>> pivot_rows;
  std::vector<double> z(k, 0.0);
  bool found = false;
  while (!active.empty()) {
    auto pos = std::find_if(active.begin(), active.end(), [&](std::size_t i) { return a[i][i].certainly_positive(); });
    if (pos != active.end()) {
      z[*pos] = 1;
      found = true;
      break;
    }
    std::optional<std::size_t> pivot;
    for (std::size_t i : active)
      if (a[i][i].certainly_negative() && (!pivot || a[i][i].midpoint() < a[*pivot][*pivot].midpoint())) pivot = i;
    if (!pivot) {
      for (std::size_t x = 0; x < active.size() && !found; ++x)
        for (std::size_t y = x + 1; y < active.size() && !found; ++y) {
          std::size_t i = active[x], j = active[y];
          const Interval& v = a[i][j];
          if (v.contains_zero()) continue;
          Interval two(Rational(2), prec);
          Interval val = a[i][i] + a[j][j] + two * (v.certainly_positive() ? v : -v);
          if (val.certainly_positive()) {
            z[i] = 1;
            z[j] = v.certainly_positive() ? 1 : -1;
            found = true;
          }
        }
      if (!found) {
        // What is left is numerically zero: accept it at the stated tolerance, uncertified.
        for (std::size_t x : active)
          for (std::size_t y : active) {
            const Interval& v = a[x][y];
            if (v.lower() == 0 && v.upper() == 0) continue;
            out.certified = false;
            if (std::max(std::fabs(v.lower()), std::fabs(v.upper())) > tolerance)
              throw InconsistencyError("CND decision undecidable at this precision");
          }
      }
      break;
    }
    std::size_t p = *pivot;
    std::vector<std::size_t> rest;
    for (std::size_t i : active)
      if (i != p) rest.push_back(i);
    pivot_rows.push_back(a[p]);
    const Interval app = a[p][p];
    for (std::size_t r : rest) {
      Interval f = a[r][p] / app;
      for (std::size_t s : rest) a[r][s] -= f * a[p][s];
    }
    steps.push_back({p, rest});
    active = std::move(rest);
  }
  if (!found) return out;

  for (std::size_t t = steps.size(); t-- > 0;) {
    const auto& row = pivot_rows[t];
    double acc = 0;
    for (std::size_t j : steps[t].rest) acc += row[j].midpoint() * z[j];
    z[steps[t].p] = -acc / row[steps[t].p].midpoint();
  }
  RationalVector zq(k);
  const Integer max_den = Integer(1) << 40;
  for (std::size_t i = 0; i < k; ++i) zq[i] = approximate_rational(z[i], max_den);
  RationalVector c = primitive_integer(extend_sum_zero(zq));
  CertifiedReal value = quadratic_form(m, c);
  if (!value.bounds.certainly_positive()) throw InconsistencyError("CND witness does not certify at this precision");
  out.is_cnd = false;
  out.witness = std::move(c);
  out.form_value = std::move(value);
  return out;
}

CndResult is_cnd_power(const RationalMatrix& m, const Rational& exponent, unsigned precision_bits) {
  RealMatrix p(m.size(), std::vector<CertifiedReal>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != m.size()) throw InputError("matrix is not square");
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (m[i][j] < 0) throw InputError("entrywise power of a negative entry");
      p[i][j] = certified_power(m[i][j], exponent, precision_bits);
    }
  }
  return is_cnd(p);
}

EuclideanVerdict is_euclidean(const FiniteMetric& m) {
  EuclideanVerdict v;
  v.axioms = validate_metric(m);
  if (!v.axioms.is_semimetric()) return v;
  RationalMatrix sq = m.d;
  for (auto& row : sq)
    for (auto& x : row) x *= x;
  v.cnd = is_cnd(sq);
  v.euclidean = v.cnd.is_cnd;
  return v;
}

EuclideanVerdict is_euclidean(const RealMetric& m) {
  EuclideanVerdict v;
  v.axioms = validate_metric(m);
  if (!v.axioms.is_semimetric()) return v;
  RealMatrix sq = m.d;
  for (auto& row : sq)
    for (auto& x : row) x = x * x;
  v.cnd = is_cnd(sq);
  v.euclidean = v.cnd.is_cnd;
  return v;
}

EuclideanVerdict is_euclidean_power(const FiniteMetric& m, const Rational& alpha, unsigned precision_bits) {
  EuclideanVerdict v;
  v.axioms = validate_metric(power_transform(m, alpha, true, precision_bits));
  if (!v.axioms.is_semimetric()) return v;
  v.cnd = is_cnd_power(m.d, 2 * alpha, precision_bits);
  v.euclidean = v.cnd.is_cnd;
  return v;
}

CertifiedReal kmn_form_value(std::size_t m, std::size_t n, const Rational& alpha, unsigned precision_bits) {
  if (m < 2 || n < 2) throw InputError("K_{m,n} threshold needs m, n >= 2");
  Rational coeff = Rational(2) - Rational(1, m) - Rational(1, n);
  coeff.canonicalize();
  for (unsigned prec = precision_bits;; prec *= 2) {
    CertifiedReal value = CertifiedReal(coeff, prec) * certified_power(Rational(4), alpha, prec) -
                          CertifiedReal(Rational(2), prec);
    // An irrational 4^alpha can never make the form vanish, so refinement terminates.
    if (value.sign() || prec >= 1u << 14) return value;
  }
}

KmnResult kmn_threshold(std::size_t m, std::size_t n, const Rational& alpha, unsigned precision_bits) {
  if (alpha <= 0 || alpha > 1) throw InputError("alpha must lie in (0,1]");
  KmnResult out;
  out.form_value = kmn_form_value(m, n, alpha, precision_bits);
  auto s = out.form_value.sign();
  if (!s) throw InconsistencyError("K_{m,n} form sign undecidable");
  out.euclidean = *s <= 0;
  FiniteMetric g = graph_metric(complete_bipartite(m, n));
  out.cnd_verdict = is_cnd_power(g.d, 2 * alpha, precision_bits).is_cnd;
  out.cross_check_agrees = out.cnd_verdict == out.euclidean;
  return out;
}

std::vector<std::string> one_hot_family(std::size_t m) {
  if (m < 1) throw InputError("family needs at least one string");
  std::vector<std::string> codes;
  codes.emplace_back(m - 1, '0');
  for (std::size_t i = 0; i + 1 < m; ++i) {
    std::string s(m - 1, '0');
    s[m - 2 - i] = '1';
    codes.push_back(s);
  }
  return codes;
}

CertifiedReal star_witness_value(std::size_t m, const Rational& alpha, unsigned precision_bits) {
  if (m < 3) throw InputError("star witness needs m >= 3");
  Rational a(static_cast<long>(m) - 1), b(static_cast<long>(m) - 2);
  CertifiedReal inner = CertifiedReal(b, precision_bits) * certified_power(Rational(2), 2 * alpha, precision_bits) -
                        CertifiedReal(Rational(2 * a), precision_bits);
  return CertifiedReal(a, precision_bits) * inner;
}

CertifiedReal star_witness_direct(std::size_t m, const Rational& alpha, unsigned precision_bits) {
  if (m < 3) throw InputError("star witness needs m >= 3");
  FiniteMetric h = hamming_metric(one_hot_family(m));
  RealMatrix p(m, std::vector<CertifiedReal>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) p[i][j] = certified_power(h.d[i][j], 2 * alpha, precision_bits);
  RationalVector c(m, Rational(-1));
  c[0] = static_cast<long>(m) - 1;
  return quadratic_form(p, c);
}

bool l1_obstruction(const FiniteMetric& m) { return !is_cnd(m.d).is_cnd; }

double PointSet::distance(std::size_t i, std::size_t j) const {
  const auto& a = points.at(i);
  const auto& b = points.at(j);
  double acc = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double t = std::fabs(a[k] - b[k]);
    switch (norm) {
      case Norm::L1: acc += t; break;
      case Norm::L2: acc += t * t; break;
      case Norm::Linf: acc = std::max(acc, t); break;
    }
  }
  return norm == Norm::L2 ? std::sqrt(acc) : acc;
}

std::vector<std::vector<double>> distance_matrix(const PointSet& p) {
  const std::size_t n = p.points.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = p.distance(i, j);
  return d;
}

PointSet realize_euclidean(const std::vector<std::vector<double>>& d, std::size_t base) {
  const auto n = static_cast<Eigen::Index>(d.size());
  PointSet out;
  out.norm = Norm::L2;
  if (n == 0) return out;
  if (base >= d.size()) throw InputError("base index out of range");
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double a = d[i][base], b = d[j][base], c = d[i][j];
      g(i, j) = 0.5 * (a * a + b * b - c * c);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const auto& lambda = es.eigenvalues();
  double lmax = std::max(0.0, lambda.maxCoeff());
  double tol = 1e-9 * std::max(1.0, lmax);
  if (lambda.minCoeff() < -tol) throw InconsistencyError("Gram matrix is not positive semidefinite");

  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = n - 1; k >= 0; --k)
    if (lambda(k) > tol * 1e-6) kept.push_back(k);
  out.points.assign(n, std::vector<double>(kept.size(), 0.0));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t c = 0; c < kept.size(); ++c)
      out.points[i][c] = es.eigenvectors()(i, kept[c]) * std::sqrt(lambda(kept[c]));

  double dmax = 0;
  for (const auto& row : d)
    for (double x : row) dmax = std::max(dmax, x);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double got = out.distance(i, j);
      double want = d[i][j];
      double err = want > 0 ? std::fabs(got - want) / want : std::fabs(got) / std::max(dmax, 1e-300);
      if (err > 1e-9) throw InconsistencyError("Gram realization does not reproduce the input distances");
    }
  return out;
}

PointSet realize_euclidean(const FiniteMetric& m, std::size_t base) {
  EuclideanVerdict v = is_euclidean(m);
  if (!v.axioms.is_semimetric()) throw InputError("realization needs a semimetric");
  std::vector<std::vector<double>> d(m.n, std::vector<double>(m.n));
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j) d[i][j] = m.d[i][j].get_d();
  if (!v.euclidean) throw InputError("metric is not Euclidean");
  return realize_euclidean(d, base);
}

PointSet l2_to_l1_montecarlo(const PointSet& p, std::size_t n_directions, std::uint64_t seed, unsigned workers) {
  if (n_directions == 0) throw InputError("need at least one direction");
  const std::size_t dim = p.dimension();
  const std::size_t n = p.points.size();
  PointSet out;
  out.norm = Norm::L1;
  out.points.assign(n, std::vector<double>(n_directions, 0.0));
  const double scale = std::sqrt(M_PI / 2.0) / static_cast<double>(n_directions);
  auto run = [&](std::size_t begin, std::size_t end) {
    std::vector<double> g(dim);
    for (std::size_t t = begin; t < end; ++t) {
      CounterRng rng(derive_seed(seed, t));
      for (auto& x : g) x = rng.normal();
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0;
        for (std::size_t k = 0; k < dim; ++k) dot += g[k] * p.points[i][k];
        out.points[i][t] = dot * scale;
      }
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1) {
    run(0, n_directions);
    return out;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n_directions + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t b = w * chunk, e = std::min(n_directions, b + chunk);
    if (b < e) pool.emplace_back(run, b, e);
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace metriclab
