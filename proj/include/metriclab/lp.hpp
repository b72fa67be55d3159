#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metriclab/rational.hpp"

namespace metriclab {

enum class Relation { Le, Eq, Ge };

const char* relation_symbol(Relation r);
Relation parse_relation(const std::string& text);

struct Row {
  std::vector<std::pair<std::size_t, Rational>> coeffs;  // sparse, variable index -> coefficient
  Relation rel = Relation::Ge;
  Rational rhs = 0;
  std::string tag;
};

/// Linear constraints over free (unbounded) rational variables.
struct ConstraintSystem {
  std::size_t vars = 0;
  std::vector<Row> rows;

  ConstraintSystem() = default;
  explicit ConstraintSystem(std::size_t n) : vars(n) {}
  void add(std::vector<std::pair<std::size_t, Rational>> coeffs, Relation rel, Rational rhs, std::string tag = "");
  /// Appends the rows of other (same variable count).
  void append(const ConstraintSystem& other);
  /// Rows whose coefficients are all zero and whose relation cannot hold.
  std::vector<std::size_t> trivially_unsatisfiable_rows() const;
};

enum class Verdict { Feasible, Infeasible };

/// Either a point satisfying every row, or row multipliers y with
/// y >= 0 on inequalities and sum_r s_r y_r a_r = 0, sum_r s_r y_r b_r > 0,
/// where s_r = -1 for <= rows and +1 otherwise.
struct FeasibilityResult {
  Verdict verdict = Verdict::Feasible;
  RationalVector point;
  RationalVector multipliers;
  std::size_t pivots = 0;
};

struct CertificateCheck {
  bool ok = false;
  std::string reason;
};

/// Phase-1 simplex with Bland's rule on the Farkas alternative; exact throughout.
FeasibilityResult feasible(const ConstraintSystem& s);
/// Same, but multipliers may only be nonzero on rows with allowed_rows[r] set.
/// A Feasible answer from a restricted run is not conclusive.
FeasibilityResult feasible_restricted(const ConstraintSystem& s, const std::vector<bool>& allowed_rows);

CertificateCheck verify_certificate(const ConstraintSystem& s, const FeasibilityResult& r);

/// Row i evaluated at x.
Rational evaluate_row(const Row& row, const RationalVector& x);
bool row_satisfied(const Row& row, const Rational& lhs);

/// A column of the final phase-1 basis: a signed row multiplier or an artificial.
struct BasisColumn {
  bool artificial = false;
  std::size_t index = 0;  // row index, or equation index for artificials
  int sign = 1;
};

/// Floating-point run of the same algorithm (Dantzig pricing with a Bland fallback).
struct FloatLpResult {
  Verdict verdict = Verdict::Feasible;
  std::vector<double> point;
  std::vector<double> multipliers;
  std::vector<BasisColumn> basis;
  std::size_t pivots = 0;
  bool converged = true;
};

FloatLpResult feasible_float(const ConstraintSystem& s, double tolerance = 1e-9);

/// Exact confirmation of a float verdict, cheapest route first: rationalized artifact,
/// exact re-solve of the final float basis, exact solve on the float support, full exact solve.
/// The returned result always verifies.
struct Confirmation {
  FeasibilityResult result;
  std::string route;  // "rationalized", "basis", "support", "full"
};

Confirmation confirm_exactly(const ConstraintSystem& s, const FloatLpResult& f);

}  // namespace metriclab
