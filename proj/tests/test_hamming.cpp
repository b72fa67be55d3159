#include "doctest.h"

#include <random>

#include "metriclab/euclidean.hpp"
#include "metriclab/hamming.hpp"

using namespace metriclab;

namespace {

GraphSpec random_tree(std::mt19937_64& rng, std::size_t n, int max_weight) {
  GraphSpec g;
  g.n = n;
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  std::shuffle(label.begin(), label.end(), rng);
  std::uniform_int_distribution<int> w(1, max_weight);
  for (std::size_t v = 1; v < n; ++v) {
    std::size_t p = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    g.add_edge(label[v], label[p], w(rng));
  }
  std::shuffle(g.edges.begin(), g.edges.end(), rng);
  return g;
}

bool connected(std::size_t n, unsigned mask, const std::vector<std::array<std::size_t, 2>>& pairs) {
  std::vector<std::size_t> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = i;
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if ((mask >> k) & 1) {
      std::size_t a = comp[pairs[k][0]], b = comp[pairs[k][1]];
      for (auto& c : comp)
        if (c == b) c = a;
    }
  for (auto c : comp)
    if (c != comp[0]) return false;
  return true;
}

}  // namespace

TEST_CASE("embed_tree on a star, root first") {
  GraphSpec star;
  star.n = 4;
  star.add_edge(0, 1);
  star.add_edge(0, 2);
  star.add_edge(0, 3);
  CubeEmbedding e = embed_tree(star);
  CHECK(e.dim == 3);
  CHECK(e.scale == 1);
  CHECK(e.codes == std::vector<std::string>{"000", "100", "010", "001"});
  CHECK(hamming_distance(e.codes[1], e.codes[2]) == 2);
  CHECK(e.verified);
}

TEST_CASE("embed_tree degenerate and path inputs") {
  GraphSpec one;
  one.n = 1;
  CubeEmbedding e = embed_tree(one);
  CHECK(e.dim == 0);
  CHECK(e.codes == std::vector<std::string>{""});

  CubeEmbedding p = embed_tree(path_graph(5));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(static_cast<long>(hamming_distance(p.codes[i], p.codes[j])) == std::labs(long(i) - long(j)));
}

TEST_CASE("embed_tree rejects non-trees") {
  CHECK_THROWS_AS(embed_tree(ring_graph(4)), InputError);
  GraphSpec split;
  split.n = 4;
  split.add_edge(0, 1);
  split.add_edge(0, 1);
  split.add_edge(2, 3);
  CHECK_THROWS_AS(embed_tree(split), InputError);
}

TEST_CASE("embed_tree scales fractional weights") {
  GraphSpec g;
  g.n = 3;
  g.add_edge(0, 1, Rational(1, 2));
  g.add_edge(1, 2, Rational(3, 4));
  CubeEmbedding e = embed_tree(g);
  CHECK(e.scale == Rational(1, 4));
  CHECK(e.dim == 5);
  CHECK(verify_cube_embedding(e, graph_metric(g)).ok);
}

TEST_CASE("property: random weighted trees embed exactly") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    GraphSpec t = random_tree(rng, 1 + trial % 10, 5);
    CubeEmbedding e = embed_tree(t);
    CHECK(verify_cube_embedding(e, graph_metric(t)).ok);
  }
}

TEST_CASE("embed_path") {
  CubeEmbedding p3 = embed_path(3);
  CHECK(p3.codes == std::vector<std::string>{"00", "01", "11"});
  CHECK(hamming_distance(p3.codes[0], p3.codes[2]) == 2);
  CHECK(embed_path(1).codes == std::vector<std::string>{""});
  CubeEmbedding p8 = embed_path(8);
  int pairs = 0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i + 1; j < 8; ++j, ++pairs) CHECK(hamming_distance(p8.codes[i], p8.codes[j]) == j - i);
  CHECK(pairs == 28);
  for (std::size_t m = 1; m <= 32; ++m) CHECK(embed_path(m).verified);
}

TEST_CASE("embed_ring") {
  CubeEmbedding r6 = embed_ring(6);
  CHECK(r6.dim == 3);
  CHECK(r6.scale == 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(hamming_distance(r6.codes[i], r6.codes[i + 3]) == 3);
  CHECK(r6.codes == std::vector<std::string>{"000", "001", "011", "111", "110", "100"});

  CubeEmbedding r4 = embed_ring(4);
  CHECK(r4.dim == 2);
  CHECK(r4.codes == std::vector<std::string>{"00", "01", "11", "10"});

  CubeEmbedding r5 = embed_ring(5);
  CHECK(r5.dim == 5);
  CHECK(r5.scale == Rational(1, 2));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) {
      Rational d = r5.scale * static_cast<long>(hamming_distance(r5.codes[i], r5.codes[j]));
      CHECK((d == 1 || d == 2));
    }
  CHECK_THROWS_AS(embed_ring(2), InputError);
  for (std::size_t n = 3; n <= 20; ++n) CHECK(embed_ring(n).verified);
}

TEST_CASE("small-graph catalog covers every connected graph on up to 4 nodes") {
  const auto& cat = small_graph_catalog();
  int four_node_classes = 0;
  for (const auto& entry : cat) {
    CubeEmbedding e;
    e.dim = entry.codes[0].size();
    e.scale = entry.scale;
    e.codes = entry.codes;
    CHECK_MESSAGE(verify_cube_embedding(e, graph_metric(catalog_graph(entry))).ok, entry.name);
    if (entry.n == 4) ++four_node_classes;
    if (entry.name == "k3" || entry.name == "k4" || entry.name == "paw" || entry.name == "diamond") {
      CHECK(entry.scale == Rational(1, 2));
      CHECK(e.dim <= 5);
    }
  }
  CHECK(four_node_classes == 6);

  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::array<std::size_t, 2>> pairs;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j});
    int count = 0;
    for (unsigned mask = 0; mask < (1u << pairs.size()); ++mask) {
      if (!connected(n, mask, pairs)) continue;
      GraphSpec g;
      g.n = n;
      for (std::size_t k = 0; k < pairs.size(); ++k)
        if ((mask >> k) & 1) g.add_edge(pairs[k][0], pairs[k][1]);
      CubeEmbedding e = embed_small_graph(g);
      CHECK(verify_cube_embedding(e, graph_metric(g)).ok);
      ++count;
    }
    // Connected labelled graphs on n nodes: 1, 1, 4, 38.
    const int expected[] = {0, 1, 1, 4, 38};
    CHECK(count == expected[n]);
  }
}

TEST_CASE("embed_small_graph examples") {
  CubeEmbedding p4 = embed_small_graph(path_graph(4));
  CHECK(p4.dim == 3);
  CHECK(p4.scale == 1);
  CubeEmbedding k3 = embed_small_graph(ring_graph(3));
  CHECK(k3.scale == Rational(1, 2));
  CHECK(k3.dim <= 5);
  CubeEmbedding k4 = embed_small_graph(complete_bipartite(1, 3));
  CHECK(k4.scale == 1);
  GraphSpec full;
  full.n = 4;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) full.add_edge(i, j);
  CubeEmbedding kk = embed_small_graph(full);
  CHECK(kk.scale == Rational(1, 2));
  CHECK(kk.verified);
  CHECK_THROWS_AS(embed_small_graph(path_graph(5)), InputError);
}

TEST_CASE("embed_product examples") {
  CubeEmbedding p2 = embed_path(2);
  CubeEmbedding sq = embed_product(p2, p2);
  CHECK(sq.dim == 2);
  FiniteMetric square = product_metric(graph_metric(path_graph(2)), graph_metric(path_graph(2)));
  CHECK(verify_cube_embedding(sq, square).ok);
  // (0,0) (0,1) (1,1) (1,0) is the 4-cycle.
  CHECK(square(0, 3) == 2);
  CHECK(square(1, 2) == 2);
  CHECK(sq.codes == std::vector<std::string>{"00", "01", "10", "11"});

  CubeEmbedding p3 = embed_path(3);
  CubeEmbedding grid = embed_product(p3, p3);
  FiniteMetric gm = product_metric(graph_metric(path_graph(3)), graph_metric(path_graph(3)));
  CHECK(gm.n == 9);
  CHECK(verify_cube_embedding(grid, gm).ok);

  CubeEmbedding prism = embed_product(embed_ring(6), p2);
  CHECK(verify_cube_embedding(prism, product_metric(ring_metric(6), graph_metric(path_graph(2)))).ok);

  CubeEmbedding mixed = embed_product(embed_ring(5), p3);
  CHECK(mixed.scale == Rational(1, 2));
  CHECK(verify_cube_embedding(mixed, product_metric(ring_metric(5), graph_metric(path_graph(3)))).ok);

  CubeEmbedding raw;
  raw.dim = 1;
  raw.codes = {"0", "1"};
  CHECK_THROWS_AS(embed_product(raw, p2), InputError);
}

TEST_CASE("property: products of verified embeddings verify") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 50; ++trial) {
    GraphSpec t = random_tree(rng, 1 + trial % 5, 3);
    std::size_t ring = 3 + trial % 6;
    CubeEmbedding a = embed_tree(t);
    CubeEmbedding b = embed_ring(ring);
    CubeEmbedding e = embed_product(a, b);
    CHECK(verify_cube_embedding(e, product_metric(graph_metric(t), ring_metric(ring))).ok);
  }
}

TEST_CASE("embed_lattice_box") {
  CubeEmbedding cube = embed_lattice_box({1, 1, 1});
  CHECK(cube.dim == 3);
  CHECK(cube.codes == std::vector<std::string>{"000", "001", "010", "011", "100", "101", "110", "111"});

  CubeEmbedding box = embed_lattice_box({3, 2});
  CHECK(box.codes.size() == 12);
  CHECK(box.dim == 5);
  FiniteMetric bm = lattice_box_metric({3, 2});
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = i + 1; j < 12; ++j, ++pairs) {
      long xi = i / 3, yi = i % 3, xj = j / 3, yj = j % 3;
      CHECK(bm(i, j) == std::labs(xi - xj) + std::labs(yi - yj));
    }
  CHECK(pairs == 66);
  CHECK(verify_cube_embedding(box, bm).ok);

  CubeEmbedding line = embed_lattice_box({10});
  CHECK(line.codes == embed_path(11).codes);
}

TEST_CASE("verify_cube_embedding negative cases") {
  CubeEmbedding p = embed_path(5);
  p.codes[2][0] = p.codes[2][0] == '0' ? '1' : '0';
  CubeCheck c = verify_cube_embedding(p, graph_metric(path_graph(5)));
  CHECK_FALSE(c.ok);
  CHECK_FALSE(p.verified);
  REQUIRE(c.failing_pair);
  CHECK(*c.failing_pair == std::array<std::size_t, 2>{0, 2});

  CubeEmbedding wrong = embed_path(3);
  CHECK_FALSE(verify_cube_embedding(wrong, graph_metric(path_graph(4))).ok);
}

TEST_CASE("K_{3,2} has no cube embedding and is l1-obstructed") {
  FiniteMetric k = graph_metric(complete_bipartite(3, 2));
  CHECK(l1_obstruction(k));
  for (std::size_t dim = 1; dim <= 8; ++dim) {
    CHECK_FALSE(search_cube_embedding(k, dim, 1));
    CHECK_FALSE(search_cube_embedding(k, dim, Rational(1, 2)));
  }
  CHECK_FALSE(search_cube_embedding(k, 10, 1));
  CHECK_FALSE(search_cube_embedding(k, 10, Rational(1, 2)));
  // The search does find embeddings where they exist.
  auto c4 = search_cube_embedding(ring_metric(4), 2, 1);
  REQUIRE(c4);
  CHECK(c4->verified);
  CHECK(search_cube_embedding(graph_metric(complete_bipartite(2, 2)), 2, 1));
}
