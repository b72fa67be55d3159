#include "metriclab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <type_traits>

namespace metriclab {

const char* relation_symbol(Relation r) {
  switch (r) {
    case Relation::Le: return "<=";
    case Relation::Eq: return "=";
    case Relation::Ge: return ">=";
  }
  return "?";
}

Relation parse_relation(const std::string& text) {
  if (text == "<=") return Relation::Le;
  if (text == "=" || text == "==") return Relation::Eq;
  if (text == ">=") return Relation::Ge;
  throw InputError("unknown relation '" + text + "'");
}

void ConstraintSystem::add(std::vector<std::pair<std::size_t, Rational>> coeffs, Relation rel, Rational rhs,
                           std::string tag) {
  std::sort(coeffs.begin(), coeffs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<std::size_t, Rational>> merged;
  for (auto& [v, c] : coeffs) {
    if (v >= vars) throw InputError("variable index out of range in row '" + tag + "'");
    if (!merged.empty() && merged.back().first == v)
      merged.back().second += c;
    else
      merged.emplace_back(v, c);
  }
  std::erase_if(merged, [](const auto& p) { return p.second == 0; });
  for (auto& p : merged) p.second.canonicalize();
  rhs.canonicalize();
  rows.push_back(Row{std::move(merged), rel, std::move(rhs), std::move(tag)});
}

void ConstraintSystem::append(const ConstraintSystem& other) {
  if (other.vars != vars) throw InputError("appending a system over a different variable count");
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::vector<std::size_t> ConstraintSystem::trivially_unsatisfiable_rows() const {
  std::vector<std::size_t> bad;
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].coeffs.empty() && !row_satisfied(rows[r], Rational(0))) bad.push_back(r);
  return bad;
}

Rational evaluate_row(const Row& row, const RationalVector& x) {
  Rational acc = 0;
  for (const auto& [v, c] : row.coeffs) acc += c * x.at(v);
  return acc;
}

bool row_satisfied(const Row& row, const Rational& lhs) {
  switch (row.rel) {
    case Relation::Le: return lhs <= row.rhs;
    case Relation::Eq: return lhs == row.rhs;
    case Relation::Ge: return lhs >= row.rhs;
  }
  return false;
}

namespace {

int orientation(Relation r) { return r == Relation::Le ? -1 : 1; }

struct Column {
  std::size_t row;
  int sign;  // +1 or -1 times the oriented row
};

std::vector<Column> farkas_columns(const ConstraintSystem& s, const std::vector<bool>* allowed) {
  std::vector<Column> cols;
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    if (allowed && !(*allowed)[r]) continue;
    int o = orientation(s.rows[r].rel);
    cols.push_back({r, o});
    if (s.rows[r].rel == Relation::Eq) cols.push_back({r, -o});
  }
  return cols;
}

struct ExactOps {
  using T = Rational;
  static bool zero(const T& x) { return sgn(x) == 0; }
  static bool pos(const T& x) { return sgn(x) > 0; }
  static bool neg(const T& x) { return sgn(x) < 0; }
  static T from(const Rational& q) { return q; }
};

struct FloatOps {
  using T = double;
  static inline thread_local double tol = 1e-9;
  static bool zero(double x) { return std::fabs(x) <= tol; }
  static bool pos(double x) { return x > tol; }
  static bool neg(double x) { return x < -tol; }
  static double from(const Rational& q) { return q.get_d(); }
};

template <class Ops>
struct Phase1 {
  using T = typename Ops::T;
  std::size_t m = 0;       // equations: one per variable plus the rhs row
  std::size_t ncols = 0;   // multiplier columns
  std::size_t total = 0;   // multiplier columns plus artificials
  std::vector<std::vector<T>> tab;  // m rows x (total + 1)
  std::vector<T> rc;                // reduced costs, last entry = -objective
  std::vector<std::size_t> basis;
  std::size_t pivots = 0;
  bool converged = true;

  Phase1(const ConstraintSystem& s, const std::vector<Column>& cols) {
    m = s.vars + 1;
    ncols = cols.size();
    total = ncols + m;
    tab.assign(m, std::vector<T>(total + 1, T(0)));
    for (std::size_t j = 0; j < ncols; ++j) {
      const Row& row = s.rows[cols[j].row];
      for (const auto& [v, c] : row.coeffs) tab[v][j] = Ops::from(c) * T(cols[j].sign);
      tab[s.vars][j] = Ops::from(row.rhs) * T(cols[j].sign);
    }
    for (std::size_t i = 0; i < m; ++i) tab[i][ncols + i] = T(1);
    tab[s.vars][total] = T(1);
    rc.assign(total + 1, T(0));
    for (std::size_t j = 0; j < ncols; ++j)
      for (std::size_t i = 0; i < m; ++i)
        if (!Ops::zero(tab[i][j])) rc[j] -= tab[i][j];
    rc[total] = T(-1);
    basis.resize(m);
    for (std::size_t i = 0; i < m; ++i) basis[i] = ncols + i;
  }

  void pivot(std::size_t p, std::size_t q) {
    ++pivots;
    T piv = tab[p][q];
    std::vector<std::size_t> nz;
    for (std::size_t k = 0; k <= total; ++k)
      if (!Ops::zero(tab[p][k]) || k == q) {
        tab[p][k] /= piv;
        nz.push_back(k);
      } else {
        tab[p][k] = T(0);
      }
    tab[p][q] = T(1);
    auto eliminate = [&](std::vector<T>& row) {
      if (Ops::zero(row[q])) {
        row[q] = T(0);
        return;
      }
      T f = row[q];
      for (std::size_t k : nz) row[k] -= f * tab[p][k];
      row[q] = T(0);
    };
    for (std::size_t i = 0; i < m; ++i)
      if (i != p) eliminate(tab[i]);
    eliminate(rc);
    basis[p] = q;
  }

  void run(bool bland_only) {
    const std::size_t bland_after = 50 * m + 200;
    const std::size_t hard_limit = std::numeric_limits<std::size_t>::max();
    const std::size_t float_limit = 200 * (m + total);
    std::vector<char> blocked(total, 0);
    for (;;) {
      bool bland = bland_only || pivots >= bland_after;
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < total; ++j) {
        if (blocked[j] || !Ops::neg(rc[j])) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (!enter || rc[j] < rc[*enter]) enter = j;
      }
      if (!enter) return;
      std::size_t q = *enter;
      std::optional<std::size_t> leave;
      T best = T(0);
      for (std::size_t i = 0; i < m; ++i) {
        if (!Ops::pos(tab[i][q])) continue;
        T ratio = tab[i][total] / tab[i][q];
        bool better;
        if constexpr (std::is_same_v<T, Rational>)
          better = !leave || ratio < best || (ratio == best && basis[i] < basis[*leave]);
        else
          // among near-ties prefer the largest pivot element
          better = !leave || Ops::neg(ratio - best) || (Ops::zero(ratio - best) && tab[i][q] > tab[*leave][q]);
        if (better) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) {
        // Phase-1 objective is bounded below by zero, so an unbounded ray is rounding drift.
        // Recompute the reduced cost from the column; skip the column until the next pivot if it is still negative.
        if constexpr (std::is_same_v<T, Rational>) {
          converged = false;
          return;
        } else {
          rc[q] = fresh_cost(q);
          if (Ops::neg(rc[q])) blocked[q] = 1;
          continue;
        }
      }
      std::fill(blocked.begin(), blocked.end(), 0);
      pivot(*leave, q);
      if (pivots > (bland_only ? hard_limit : float_limit)) {
        converged = false;
        return;
      }
    }
  }

  // c_q minus the artificial costs times the current column.
  T fresh_cost(std::size_t q) const {
    T r = q >= ncols ? T(1) : T(0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] >= ncols) r -= tab[i][q];
    return r;
  }

  T objective() const { return -rc[total]; }
};

FeasibilityResult solve_exact(const ConstraintSystem& s, const std::vector<bool>* allowed) {
  std::vector<Column> cols = farkas_columns(s, allowed);
  Phase1<ExactOps> lp(s, cols);
  lp.run(true);
  FeasibilityResult out;
  out.pivots = lp.pivots;
  if (lp.objective() == 0) {
    out.verdict = Verdict::Infeasible;
    out.multipliers.assign(s.rows.size(), Rational(0));
    for (std::size_t i = 0; i < lp.m; ++i) {
      std::size_t j = lp.basis[i];
      if (j >= lp.ncols) continue;
      out.multipliers[cols[j].row] += lp.tab[i][lp.total] * (cols[j].sign * orientation(s.rows[cols[j].row].rel));
    }
    return out;
  }
  out.verdict = Verdict::Feasible;
  // Dual of the phase-1 problem: w_i = 1 - (reduced cost of artificial i); point = -w_x / w_t.
  Rational t = 1 - lp.rc[lp.ncols + s.vars];
  out.point.resize(s.vars);
  for (std::size_t v = 0; v < s.vars; ++v) out.point[v] = -(1 - lp.rc[lp.ncols + v]) / t;
  return out;
}

}  // namespace

FeasibilityResult feasible(const ConstraintSystem& s) {
  FeasibilityResult r = solve_exact(s, nullptr);
  CertificateCheck c = verify_certificate(s, r);
  if (!c.ok) throw InconsistencyError("exact LP produced an artifact that does not verify: " + c.reason);
  return r;
}

FeasibilityResult feasible_restricted(const ConstraintSystem& s, const std::vector<bool>& allowed_rows) {
  if (allowed_rows.size() != s.rows.size()) throw InputError("row mask has the wrong length");
  return solve_exact(s, &allowed_rows);
}

CertificateCheck verify_certificate(const ConstraintSystem& s, const FeasibilityResult& r) {
  CertificateCheck c;
  if (r.verdict == Verdict::Feasible) {
    if (r.point.size() != s.vars) {
      c.reason = "point has the wrong dimension";
      return c;
    }
    for (std::size_t i = 0; i < s.rows.size(); ++i)
      if (!row_satisfied(s.rows[i], evaluate_row(s.rows[i], r.point))) {
        c.reason = "point violates row " + std::to_string(i) +
                   (s.rows[i].tag.empty() ? std::string() : " (" + s.rows[i].tag + ")");
        return c;
      }
    c.ok = true;
    return c;
  }
  if (r.multipliers.size() != s.rows.size()) {
    c.reason = "multiplier count does not match row count";
    return c;
  }
  RationalVector combo(s.vars, Rational(0));
  Rational rhs = 0;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const Rational& y = r.multipliers[i];
    if (y == 0) continue;
    if (s.rows[i].rel != Relation::Eq && y < 0) {
      c.reason = "negative multiplier on inequality row " + std::to_string(i);
      return c;
    }
    Rational f = y * orientation(s.rows[i].rel);
    for (const auto& [v, a] : s.rows[i].coeffs) combo[v] += f * a;
    rhs += f * s.rows[i].rhs;
  }
  for (std::size_t v = 0; v < s.vars; ++v)
    if (combo[v] != 0) {
      c.reason = "combined coefficient of variable " + std::to_string(v) + " is nonzero";
      return c;
    }
  if (rhs <= 0) {
    c.reason = "combined right-hand side is not positive";
    return c;
  }
  c.ok = true;
  return c;
}

FloatLpResult feasible_float(const ConstraintSystem& s, double tolerance) {
  FloatOps::tol = tolerance;
  std::vector<Column> cols = farkas_columns(s, nullptr);
  Phase1<FloatOps> lp(s, cols);
  lp.run(false);
  FloatLpResult out;
  out.pivots = lp.pivots;
  out.converged = lp.converged;
  for (std::size_t i = 0; i < lp.m; ++i) {
    std::size_t j = lp.basis[i];
    if (j >= lp.ncols)
      out.basis.push_back({true, j - lp.ncols, 1});
    else
      out.basis.push_back({false, cols[j].row, cols[j].sign});
  }
  if (lp.objective() <= tolerance) {
    out.verdict = Verdict::Infeasible;
    out.multipliers.assign(s.rows.size(), 0.0);
    for (std::size_t i = 0; i < lp.m; ++i) {
      std::size_t j = lp.basis[i];
      if (j >= lp.ncols) continue;
      out.multipliers[cols[j].row] += lp.tab[i][lp.total] * cols[j].sign * orientation(s.rows[cols[j].row].rel);
    }
    return out;
  }
  out.verdict = Verdict::Feasible;
  double t = 1.0 - lp.rc[lp.ncols + s.vars];
  out.point.resize(s.vars);
  for (std::size_t v = 0; v < s.vars; ++v) out.point[v] = -(1.0 - lp.rc[lp.ncols + v]) / t;
  return out;
}

namespace {

// Solves B y = (0,...,0,1) exactly for the columns of a float basis; a nonnegative solution
// with zero artificials is a certificate.
std::optional<FeasibilityResult> certificate_from_basis(const ConstraintSystem& s,
                                                        const std::vector<BasisColumn>& basis) {
  const std::size_t m = s.vars + 1;
  if (basis.size() != m) return std::nullopt;
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1, Rational(0)));
  for (std::size_t c = 0; c < m; ++c) {
    const BasisColumn& b = basis[c];
    if (b.artificial) {
      if (b.index >= m) return std::nullopt;
      a[b.index][c] = 1;
      continue;
    }
    if (b.index >= s.rows.size()) return std::nullopt;
    const Row& row = s.rows[b.index];
    for (const auto& [v, coef] : row.coeffs) a[v][c] = coef * b.sign;
    a[s.vars][c] = row.rhs * b.sign;
  }
  a[s.vars][m] = 1;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    while (piv < m && a[piv][col] == 0) ++piv;
    if (piv == m) return std::nullopt;
    std::swap(a[piv], a[col]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col] / a[col][col];
      for (std::size_t k = col; k <= m; ++k)
        if (a[col][k] != 0) a[r][k] -= f * a[col][k];
    }
  }
  FeasibilityResult out;
  out.verdict = Verdict::Infeasible;
  out.multipliers.assign(s.rows.size(), Rational(0));
  for (std::size_t c = 0; c < m; ++c) {
    Rational y = a[c][m] / a[c][c];
    if (y < 0) return std::nullopt;
    if (basis[c].artificial) {
      if (y != 0) return std::nullopt;
      continue;
    }
    out.multipliers[basis[c].index] += y * (basis[c].sign * orientation(s.rows[basis[c].index].rel));
  }
  for (auto& y : out.multipliers) y.canonicalize();
  return out;
}

}  // namespace

Confirmation confirm_exactly(const ConstraintSystem& s, const FloatLpResult& f) {
  Confirmation c;
  if (f.converged) {
    FeasibilityResult guess;
    guess.verdict = f.verdict;
    if (f.verdict == Verdict::Infeasible) {
      for (double y : f.multipliers) guess.multipliers.push_back(std::fabs(y) < 1e-12 ? Rational(0) : rationalize(y, 1e-9));
    } else {
      for (double x : f.point) guess.point.push_back(rationalize(x, 1e-9));
    }
    if (verify_certificate(s, guess).ok) {
      c.result = std::move(guess);
      c.route = "rationalized";
      return c;
    }
    if (f.verdict == Verdict::Infeasible) {
      if (auto b = certificate_from_basis(s, f.basis); b && verify_certificate(s, *b).ok) {
        c.result = std::move(*b);
        c.route = "basis";
        return c;
      }
      std::vector<bool> support(s.rows.size(), false);
      for (std::size_t r = 0; r < s.rows.size(); ++r) support[r] = std::fabs(f.multipliers[r]) > 1e-12;
      FeasibilityResult restricted = feasible_restricted(s, support);
      if (restricted.verdict == Verdict::Infeasible && verify_certificate(s, restricted).ok) {
        c.result = std::move(restricted);
        c.route = "support";
        return c;
      }
    }
  }
  c.result = feasible(s);
  c.route = "full";
  return c;
}

}  // namespace metriclab
