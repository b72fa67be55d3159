#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "metriclab/interval.hpp"
#include "metriclab/metric.hpp"

namespace metriclab {

struct CndResult {
  bool is_cnd = true;
  /// Sum-zero integer vector with c^T M c > 0, present iff !is_cnd.
  std::optional<RationalVector> witness;
  std::optional<CertifiedReal> form_value;
  /// Eigenvalue range of the form on the sum-zero subspace (double precision summary).
  double min_eigenvalue = 0;
  double max_eigenvalue = 0;
  /// False when some pivot stayed within tolerance of zero on the enclosure path.
  bool certified = true;
  bool exact = true;
  unsigned precision_bits = kDefaultPrecisionBits;
};

CertifiedReal quadratic_form(const RationalMatrix& m, const RationalVector& c);
CertifiedReal quadratic_form(const RealMatrix& m, const RationalVector& c);

/// Is sum_ij c_i c_j M_ij <= 0 for every c with sum c = 0?
CndResult is_cnd(const RationalMatrix& m);
CndResult is_cnd(const RealMatrix& m, double tolerance = 1e-9);
/// Tests M^exponent entrywise; exact whenever every entry power is rational.
CndResult is_cnd_power(const RationalMatrix& m, const Rational& exponent,
                       unsigned precision_bits = kDefaultPrecisionBits);

struct EuclideanVerdict {
  bool euclidean = false;
  AxiomReport axioms;
  CndResult cnd;
};

/// Semimetric and d^2 CND.
EuclideanVerdict is_euclidean(const FiniteMetric& m);
EuclideanVerdict is_euclidean(const RealMetric& m);
/// Euclideanness of d^alpha, computed from the base metric without squaring enclosures.
EuclideanVerdict is_euclidean_power(const FiniteMetric& m, const Rational& alpha,
                                    unsigned precision_bits = kDefaultPrecisionBits);

struct KmnResult {
  bool euclidean = false;
  CertifiedReal form_value;
  bool cnd_verdict = false;
  bool cross_check_agrees = false;
};

/// Sign of (2 - 1/m - 1/n) 4^alpha - 2, cross-checked against the CND test on K_{m,n}.
KmnResult kmn_threshold(std::size_t m, std::size_t n, const Rational& alpha,
                        unsigned precision_bits = kDefaultPrecisionBits);
CertifiedReal kmn_form_value(std::size_t m, std::size_t n, const Rational& alpha,
                             unsigned precision_bits = kDefaultPrecisionBits);

/// c^T M c for c = (m-1, -1, ..., -1) on the zero string plus m-1 one-hot strings, M = d_H^(2 alpha).
CertifiedReal star_witness_value(std::size_t m, const Rational& alpha,
                                 unsigned precision_bits = kDefaultPrecisionBits);
CertifiedReal star_witness_direct(std::size_t m, const Rational& alpha,
                                  unsigned precision_bits = kDefaultPrecisionBits);
/// The zero string followed by the m-1 one-hot strings of length m-1.
std::vector<std::string> one_hot_family(std::size_t m);

/// True iff d itself is not CND; then d embeds into no l1 space.
bool l1_obstruction(const FiniteMetric& m);

enum class Norm { L1, L2, Linf };

struct PointSet {
  std::vector<std::vector<double>> points;
  Norm norm = Norm::L2;

  std::size_t dimension() const { return points.empty() ? 0 : points.front().size(); }
  double distance(std::size_t i, std::size_t j) const;
};

/// Gram factorization. Throws InconsistencyError if the Gram matrix is not PSD within tolerance
/// or the round trip misses the input by more than 1e-9 relative.
PointSet realize_euclidean(const FiniteMetric& m, std::size_t base = 0);
PointSet realize_euclidean(const std::vector<std::vector<double>>& d, std::size_t base = 0);

/// Coordinates <g_t, x> sqrt(pi/2)/N with Gaussian directions g_t drawn from (seed, t).
/// Results do not depend on the worker count.
PointSet l2_to_l1_montecarlo(const PointSet& p, std::size_t n_directions, std::uint64_t seed,
                             unsigned workers = 1);

std::vector<std::vector<double>> distance_matrix(const PointSet& p);

}  // namespace metriclab
