#include "metriclab/metric.hpp"

#include <algorithm>
#include <sstream>

namespace metriclab {

FiniteMetric::FiniteMetric(RationalMatrix matrix, std::vector<std::string> names)
    : n(matrix.size()), d(std::move(matrix)), labels(std::move(names)) {
  for (auto& row : d) {
    if (row.size() != n) throw InputError("distance matrix is not square");
    for (auto& x : row) x.canonicalize();
  }
  if (!labels.empty() && labels.size() != n) throw InputError("label count does not match point count");
}

bool RealMetric::all_exact() const {
  for (const auto& row : d)
    for (const auto& x : row)
      if (!x.is_exact()) return false;
  return true;
}

FiniteMetric RealMetric::to_exact() const {
  RationalMatrix out = zero_matrix(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!d[i][j].is_exact()) throw InputError("power metric has irrational entries");
      out[i][j] = *d[i][j].exact;
    }
  return FiniteMetric(std::move(out));
}

const char* axiom_name(Axiom a) {
  switch (a) {
    case Axiom::Positivity: return "P";
    case Axiom::Zero: return "Z";
    case Axiom::NonDegenerate: return "N";
    case Axiom::Symmetry: return "S";
    case Axiom::Triangle: return "TI";
  }
  return "?";
}

bool AxiomReport::operator==(const AxiomReport& o) const {
  return positivity == o.positivity && zero_diagonal == o.zero_diagonal && non_degenerate == o.non_degenerate &&
         symmetric == o.symmetric && triangle == o.triangle && positivity_witness == o.positivity_witness &&
         zero_witness == o.zero_witness && degenerate_witness == o.degenerate_witness &&
         symmetry_witness == o.symmetry_witness && triangle_witness == o.triangle_witness &&
         undecided == o.undecided;
}

namespace {

template <class Entry, class Sign, class Equal, class Le>
AxiomReport validate_generic(std::size_t n, const std::vector<std::vector<Entry>>& d, Sign sign, Equal equal,
                             Le le) {
  AxiomReport r;
  for (std::size_t i = 0; i < n; ++i) {
    if (r.zero_diagonal && sign(d[i][i]) != 0) {
      r.zero_diagonal = false;
      r.zero_witness = i;
    }
    for (std::size_t j = 0; j < n; ++j) {
      int s = sign(d[i][j]);
      if (r.positivity && s < 0) {
        r.positivity = false;
        r.positivity_witness = std::array<std::size_t, 2>{i, j};
      }
      if (i != j && r.non_degenerate && s <= 0) {
        r.non_degenerate = false;
        r.degenerate_witness = std::array<std::size_t, 2>{i, j};
      }
      if (j > i && r.symmetric && !equal(d[i][j], d[j][i])) {
        r.symmetric = false;
        r.symmetry_witness = std::array<std::size_t, 2>{i, j};
      }
    }
  }
  for (std::size_t i = 0; i < n && r.triangle; ++i)
    for (std::size_t j = 0; j < n && r.triangle; ++j)
      for (std::size_t k = 0; k < n && r.triangle; ++k) {
        std::optional<bool> holds = le(d[i][k], d[i][j], d[j][k]);
        if (!holds) {
          ++r.undecided;
        } else if (!*holds) {
          r.triangle = false;
          r.triangle_witness = std::array<std::size_t, 3>{i, j, k};
        }
      }
  return r;
}

}  // namespace

AxiomReport validate_metric(const FiniteMetric& m) {
  return validate_generic(
      m.n, m.d, [](const Rational& x) { return sgn(x); },
      [](const Rational& a, const Rational& b) { return a == b; },
      [](const Rational& ik, const Rational& ij, const Rational& jk) -> std::optional<bool> {
        return ik <= ij + jk;
      });
}

AxiomReport validate_metric(const RealMetric& m) {
  // Entries x^a with equal exact bases are the same number; compare bases when enclosures overlap.
  return validate_generic(
      m.n, m.d,
      [](const CertifiedReal& x) {
        auto s = x.sign();
        if (!s) throw InconsistencyError("sign of a power entry is undecidable");
        return *s;
      },
      [](const CertifiedReal& a, const CertifiedReal& b) {
        if (a.exact && b.exact) return *a.exact == *b.exact;
        return mpfr_equal_p(a.bounds.lo(), b.bounds.lo()) && mpfr_equal_p(a.bounds.hi(), b.bounds.hi());
      },
      [](const CertifiedReal& ik, const CertifiedReal& ij, const CertifiedReal& jk) -> std::optional<bool> {
        if (jk.is_exact() && *jk.exact == 0 && !ik.is_exact() && !ij.is_exact() &&
            mpfr_equal_p(ik.bounds.lo(), ij.bounds.lo()) && mpfr_equal_p(ik.bounds.hi(), ij.bounds.hi()))
          return true;
        if (ij.is_exact() && *ij.exact == 0 && !ik.is_exact() && !jk.is_exact() &&
            mpfr_equal_p(ik.bounds.lo(), jk.bounds.lo()) && mpfr_equal_p(ik.bounds.hi(), jk.bounds.hi()))
          return true;
        return certified_le(ik, ij + jk);
      });
}

FiniteMetric graph_metric(const GraphSpec& g) {
  const std::size_t n = g.n;
  std::vector<std::vector<std::optional<Rational>>> dist(n, std::vector<std::optional<Rational>>(n));
  for (std::size_t i = 0; i < n; ++i) dist[i][i] = Rational(0);
  for (const auto& e : g.edges) {
    if (e.u >= n || e.v >= n) throw InputError("edge endpoint out of range");
    if (e.u == e.v) throw InputError("self-loop at node " + std::to_string(e.u));
    if (e.w < 0) throw InputError("negative edge weight");
    Rational w = e.w;
    w.canonicalize();
    auto& cur = dist[e.u][e.v];
    if (!cur || w < *cur) {
      dist[e.u][e.v] = w;
      dist[e.v][e.u] = w;
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (!dist[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!dist[k][j]) continue;
        Rational via = *dist[i][k] + *dist[k][j];
        if (!dist[i][j] || via < *dist[i][j]) dist[i][j] = via;
      }
    }
  RationalMatrix out = zero_matrix(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!dist[i][j])
        throw InputError("graph is disconnected: no path between " + std::to_string(i) + " and " +
                         std::to_string(j));
      out[i][j] = *dist[i][j];
    }
  return FiniteMetric(std::move(out));
}

RealMetric power_transform(const FiniteMetric& m, const Rational& alpha, bool allow_above_one,
                           unsigned precision_bits) {
  if (alpha <= 0) throw InputError("power exponent must be positive");
  if (alpha > 1 && !allow_above_one) throw InputError("power exponent above 1 requires the override flag");
  AxiomReport base = validate_metric(m);
  if (!base.positivity || !base.zero_diagonal || !base.symmetric)
    throw InputError("power transform needs a symmetric nonnegative matrix with zero diagonal");
  RealMetric out;
  out.n = m.n;
  out.exponent = alpha;
  out.precision_bits = precision_bits;
  out.d.assign(m.n, std::vector<CertifiedReal>(m.n));
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = i; j < m.n; ++j) {
      out.d[i][j] = i == j ? CertifiedReal(Rational(0), precision_bits)
                           : certified_power(m.d[i][j], alpha, precision_bits);
      out.d[j][i] = out.d[i][j];
    }
  return out;
}

std::vector<RationalVector> frechet_embed(const FiniteMetric& m, std::size_t base) {
  if (base >= m.n) throw InputError("base index out of range");
  std::vector<RationalVector> pts(m.n, RationalVector(m.n));
  for (std::size_t x = 0; x < m.n; ++x)
    for (std::size_t i = 0; i < m.n; ++i) pts[x][i] = m.d[x][i] - m.d[base][i];
  return pts;
}

Rational linf_distance(const RationalVector& a, const RationalVector& b) {
  if (a.size() != b.size()) throw InputError("dimension mismatch");
  Rational best = 0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max<Rational>(best, abs(a[i] - b[i]));
  return best;
}

Rational l1_distance(const RationalVector& a, const RationalVector& b) {
  if (a.size() != b.size()) throw InputError("dimension mismatch");
  Rational sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += abs(a[i] - b[i]);
  return sum;
}

GraphSpec complete_bipartite(std::size_t m, std::size_t n) {
  GraphSpec g;
  g.n = m + n;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) g.add_edge(i, m + j);
  return g;
}

GraphSpec path_graph(std::size_t nodes) {
  GraphSpec g;
  g.n = nodes;
  for (std::size_t i = 0; i + 1 < nodes; ++i) g.add_edge(i, i + 1);
  return g;
}

GraphSpec ring_graph(std::size_t nodes) {
  GraphSpec g = path_graph(nodes);
  if (nodes >= 3) g.add_edge(nodes - 1, 0);
  return g;
}

FiniteMetric discrete_metric(std::size_t n) {
  RationalMatrix d = zero_matrix(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) d[i][j] = 1;
  return FiniteMetric(std::move(d));
}

FiniteMetric ring_metric(std::size_t n) {
  RationalMatrix d = zero_matrix(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t gap = i > j ? i - j : j - i;
      d[i][j] = static_cast<long>(std::min(gap, n - gap));
    }
  return FiniteMetric(std::move(d));
}

FiniteMetric hamming_metric(const std::vector<std::string>& codes) {
  const std::size_t n = codes.size();
  RationalMatrix d = zero_matrix(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (codes[i].size() != codes[j].size()) throw InputError("codes of unequal length");
      long h = 0;
      for (std::size_t k = 0; k < codes[i].size(); ++k) h += codes[i][k] != codes[j][k];
      d[i][j] = h;
    }
  return FiniteMetric(std::move(d), codes);
}

}  // namespace metriclab
