#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "metriclab/interval.hpp"
#include "metriclab/rational.hpp"

namespace metriclab {

/// n points with an exact distance matrix. Axioms are not enforced here; see validate_metric.
struct FiniteMetric {
  std::size_t n = 0;
  RationalMatrix d;
  std::vector<std::string> labels;

  FiniteMetric() = default;
  /// Throws InputError if the matrix is not square.
  explicit FiniteMetric(RationalMatrix matrix, std::vector<std::string> names = {});

  const Rational& operator()(std::size_t i, std::size_t j) const { return d[i][j]; }
  bool operator==(const FiniteMetric& other) const { return d == other.d; }
};

/// Entrywise power of a metric. Entries are exact where possible.
struct RealMetric {
  std::size_t n = 0;
  RealMatrix d;
  Rational exponent = 1;
  unsigned precision_bits = kDefaultPrecisionBits;

  bool all_exact() const;
  /// Only valid when all_exact().
  FiniteMetric to_exact() const;
};

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  Rational w = 1;
};

struct GraphSpec {
  std::size_t n = 0;
  std::vector<Edge> edges;

  GraphSpec() = default;
  GraphSpec(std::size_t nodes, std::vector<Edge> e) : n(nodes), edges(std::move(e)) {}
  void add_edge(std::size_t u, std::size_t v, Rational w = 1) { edges.push_back({u, v, std::move(w)}); }
};

enum class Axiom { Positivity, Zero, NonDegenerate, Symmetry, Triangle };

const char* axiom_name(Axiom a);

struct AxiomReport {
  // P: d >= 0, Z: d[i][i] = 0, N: d[i][j] > 0 off-diagonal, S: symmetric, TI: triangle.
  bool positivity = true;
  bool zero_diagonal = true;
  bool non_degenerate = true;
  bool symmetric = true;
  bool triangle = true;
  /// Witness tuples, present exactly when the matching flag is false.
  std::optional<std::array<std::size_t, 2>> positivity_witness;
  std::optional<std::size_t> zero_witness;
  std::optional<std::array<std::size_t, 2>> degenerate_witness;
  std::optional<std::array<std::size_t, 2>> symmetry_witness;
  std::optional<std::array<std::size_t, 3>> triangle_witness;
  /// Triangle comparisons that stayed undecided at the working precision (power metrics only).
  std::size_t undecided = 0;

  bool is_semimetric() const { return positivity && zero_diagonal && symmetric && triangle; }
  bool is_metric() const { return is_semimetric() && non_degenerate; }
  bool operator==(const AxiomReport& other) const;
};

AxiomReport validate_metric(const FiniteMetric& m);
AxiomReport validate_metric(const RealMetric& m);

/// Weighted shortest-path metric. Throws InputError on self-loops, negative weights,
/// out-of-range nodes or a disconnected graph.
FiniteMetric graph_metric(const GraphSpec& g);

/// d^alpha entrywise. alpha must lie in (0,1] unless allow_above_one is set.
RealMetric power_transform(const FiniteMetric& m, const Rational& alpha, bool allow_above_one = false,
                           unsigned precision_bits = kDefaultPrecisionBits);

/// phi(x)_i = d(x, x_i) - d(x_0, x_i): an exact isometry into l_inf^n.
std::vector<RationalVector> frechet_embed(const FiniteMetric& m, std::size_t base);

Rational linf_distance(const RationalVector& a, const RationalVector& b);
Rational l1_distance(const RationalVector& a, const RationalVector& b);

/// Common graph families used throughout.
GraphSpec complete_bipartite(std::size_t m, std::size_t n);
GraphSpec path_graph(std::size_t nodes);
GraphSpec ring_graph(std::size_t nodes);
FiniteMetric discrete_metric(std::size_t n);
FiniteMetric ring_metric(std::size_t n);
FiniteMetric hamming_metric(const std::vector<std::string>& codes);

}  // namespace metriclab
