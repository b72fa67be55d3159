#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "metriclab/metric.hpp"

namespace metriclab {

/// Node i maps to codes[i], a '0'/'1' string of length dim; distances are scale * Hamming.
struct CubeEmbedding {
  std::size_t dim = 0;
  Rational scale = 1;
  std::vector<std::string> codes;
  bool verified = false;
};

struct CubeCheck {
  bool ok = false;
  std::optional<std::array<std::size_t, 2>> failing_pair;
  std::string reason;
};

std::size_t hamming_distance(const std::string& a, const std::string& b);

/// Exact check of scale * d_H against the metric; sets e.verified on success.
CubeCheck verify_cube_embedding(CubeEmbedding& e, const FiniteMetric& m);

/// Weighted tree into a cube; any node order is accepted.
CubeEmbedding embed_tree(const GraphSpec& tree);
/// Node u (0-based) maps to 0^(m-1-u) 1^u in B^(m-1).
CubeEmbedding embed_path(std::size_t m);
/// Even n = 2k: dimension k, scale 1. Odd n: dimension n, scale 1/2.
CubeEmbedding embed_ring(std::size_t n);
/// Connected unit-weight graphs on at most 4 nodes, by catalog lookup.
CubeEmbedding embed_small_graph(const GraphSpec& g);
/// Embeds the product space with the sum metric; node (i, j) has index i * |E2| + j.
CubeEmbedding embed_product(const CubeEmbedding& a, const CubeEmbedding& b);
/// The grid {0..l_1} x ... x {0..l_m} with l1 distance, first coordinate most significant.
CubeEmbedding embed_lattice_box(const std::vector<std::size_t>& sides);

/// Sum metric on the index product, same index convention as embed_product.
FiniteMetric product_metric(const FiniteMetric& a, const FiniteMetric& b);
FiniteMetric lattice_box_metric(const std::vector<std::size_t>& sides);

struct CatalogEntry {
  std::string name;
  std::size_t n;
  std::vector<std::array<std::size_t, 2>> edges;
  Rational scale;
  std::vector<std::string> codes;
};

/// Connected graphs on 1 to 4 nodes, one labelled representative per isomorphism class.
const std::vector<CatalogEntry>& small_graph_catalog();
GraphSpec catalog_graph(const CatalogEntry& entry);

/// Bounded exhaustive search for a cube embedding of the given dimension and scale.
std::optional<CubeEmbedding> search_cube_embedding(const FiniteMetric& m, std::size_t dim, const Rational& scale);

}  // namespace metriclab
