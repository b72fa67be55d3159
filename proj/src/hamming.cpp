#include "metriclab/hamming.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

namespace metriclab {

std::size_t hamming_distance(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) throw InputError("codes of unequal length");
  std::size_t h = 0;
  for (std::size_t i = 0; i < a.size(); ++i) h += a[i] != b[i];
  return h;
}

CubeCheck verify_cube_embedding(CubeEmbedding& e, const FiniteMetric& m) {
  CubeCheck c;
  e.verified = false;
  if (e.codes.size() != m.n) {
    c.reason = "index sets differ";
    return c;
  }
  for (const auto& code : e.codes)
    if (code.size() != e.dim || code.find_first_not_of("01") != std::string::npos) {
      c.reason = "malformed code";
      return c;
    }
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = i + 1; j < m.n; ++j) {
      Rational got = e.scale * static_cast<long>(hamming_distance(e.codes[i], e.codes[j]));
      if (got != m(i, j) || m(i, j) != m(j, i)) {
        c.failing_pair = std::array<std::size_t, 2>{i, j};
        c.reason = "distance mismatch";
        return c;
      }
    }
  c.ok = true;
  e.verified = true;
  return c;
}

namespace {

void replicate_bits(std::string& code, std::size_t times) {
  std::string out;
  out.reserve(code.size() * times);
  for (char c : code) out.append(times, c);
  code = std::move(out);
}

}  // namespace

CubeEmbedding embed_tree(const GraphSpec& tree) {
  const std::size_t n = tree.n;
  if (n == 0) throw InputError("tree needs at least one node");
  if (tree.edges.size() != n - 1) throw InputError("not a tree: need exactly n-1 edges");
  FiniteMetric target = graph_metric(tree);  // throws when disconnected

  Integer den = 1;
  for (const auto& e : tree.edges) {
    Rational w = e.w;
    w.canonicalize();
    mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), w.get_den_mpz_t());
  }
  std::vector<Integer> blocks;
  Integer g = 0;
  for (const auto& e : tree.edges) {
    Rational w = e.w * den;
    w.canonicalize();
    blocks.push_back(w.get_num());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), w.get_num_mpz_t());
  }
  if (g == 0) g = 1;

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  for (std::size_t k = 0; k < tree.edges.size(); ++k) {
    adj[tree.edges[k].u].push_back({tree.edges[k].v, k});
    adj[tree.edges[k].v].push_back({tree.edges[k].u, k});
  }

  CubeEmbedding out;
  out.scale = Rational(g, den);
  out.scale.canonicalize();
  out.codes.assign(n, std::string());
  std::vector<bool> placed(n, false);
  std::vector<std::size_t> order;
  std::deque<std::size_t> queue = {0};
  placed[0] = true;
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (auto [v, k] : adj[u]) {
      if (placed[v]) continue;
      placed[v] = true;
      queue.push_back(v);
      Integer len = blocks[k] / g;
      if (!len.fits_ulong_p() || len > 1u << 24) throw InputError("tree weights need too many bits");
      std::size_t b = len.get_ui();
      std::string parent = out.codes[u];
      for (std::size_t w : order) out.codes[w].append(b, '0');
      for (std::size_t w : queue)
        if (w != v) out.codes[w].append(b, '0');
      out.codes[v] = parent + std::string(b, '1');
    }
  }
  out.dim = out.codes[0].size();
  if (!verify_cube_embedding(out, target).ok) throw InconsistencyError("tree embedding failed verification");
  return out;
}

CubeEmbedding embed_path(std::size_t m) {
  if (m < 1) throw InputError("path needs at least one node");
  CubeEmbedding out;
  out.dim = m - 1;
  for (std::size_t u = 0; u < m; ++u) out.codes.push_back(std::string(m - 1 - u, '0') + std::string(u, '1'));
  if (!verify_cube_embedding(out, graph_metric(path_graph(m))).ok)
    throw InconsistencyError("path embedding failed verification");
  return out;
}

namespace {

std::vector<std::string> even_ring_codes(std::size_t n) {
  const std::size_t m = n / 2;
  std::vector<std::string> codes;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i <= m)
      codes.push_back(std::string(m - i + 1, '0') + std::string(i - 1, '1'));
    else
      codes.push_back(std::string(n - i + 1, '1') + std::string(i - m - 1, '0'));
  }
  return codes;
}

}  // namespace

CubeEmbedding embed_ring(std::size_t n) {
  if (n < 3) throw InputError("ring needs at least 3 nodes");
  CubeEmbedding out;
  if (n % 2 == 0) {
    out.dim = n / 2;
    out.codes = even_ring_codes(n);
  } else {
    // Subdivide every edge and keep alternate nodes of the 2n-ring.
    std::vector<std::string> doubled = even_ring_codes(2 * n);
    out.dim = n;
    out.scale = Rational(1, 2);
    for (std::size_t i = 0; i < n; ++i) out.codes.push_back(doubled[2 * i]);
  }
  if (!verify_cube_embedding(out, ring_metric(n)).ok) throw InconsistencyError("ring embedding failed verification");
  return out;
}

const std::vector<CatalogEntry>& small_graph_catalog() {
  static const std::vector<CatalogEntry> catalog = {
      {"k1", 1, {}, Rational(1), {""}},
      {"k2", 2, {{0, 1}}, Rational(1), {"0", "1"}},
      {"p3", 3, {{0, 1}, {1, 2}}, Rational(1), {"00", "01", "11"}},
      {"k3", 3, {{0, 1}, {1, 2}, {0, 2}}, Rational(1, 2), {"000", "011", "101"}},
      {"p4", 4, {{0, 1}, {1, 2}, {2, 3}}, Rational(1), {"000", "001", "011", "111"}},
      {"star", 4, {{0, 1}, {0, 2}, {0, 3}}, Rational(1), {"000", "001", "010", "100"}},
      {"c4", 4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, Rational(1), {"00", "01", "11", "10"}},
      {"paw", 4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}, Rational(1, 2), {"00000", "00011", "00101", "11101"}},
      {"diamond", 4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}}, Rational(1, 2), {"0000", "0011", "0101", "1010"}},
      {"k4", 4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, Rational(1, 2), {"000", "011", "101", "110"}},
  };
  return catalog;
}

GraphSpec catalog_graph(const CatalogEntry& entry) {
  GraphSpec g;
  g.n = entry.n;
  for (auto [u, v] : entry.edges) g.add_edge(u, v);
  return g;
}

CubeEmbedding embed_small_graph(const GraphSpec& g) {
  if (g.n > 4) throw InputError("embed_small_graph handles at most 4 nodes; use embed_tree, embed_ring or embed_product");
  if (g.n == 0) throw InputError("graph needs at least one node");
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& e : g.edges) {
    if (e.w != 1) throw InputError("embed_small_graph expects unit weights");
    if (e.u >= g.n || e.v >= g.n || e.u == e.v) throw InputError("invalid edge");
    edges.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
  }
  FiniteMetric target = graph_metric(g);
  for (const auto& entry : small_graph_catalog()) {
    if (entry.n != g.n || entry.edges.size() != edges.size()) continue;
    std::vector<std::size_t> perm(g.n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      bool match = true;
      for (auto [a, b] : entry.edges) {
        std::size_t u = perm[a], v = perm[b];
        if (!edges.count({std::min(u, v), std::max(u, v)})) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      CubeEmbedding out;
      out.scale = entry.scale;
      out.codes.assign(g.n, std::string());
      for (std::size_t c = 0; c < g.n; ++c) out.codes[perm[c]] = entry.codes[c];
      out.dim = out.codes[0].size();
      if (!verify_cube_embedding(out, target).ok) throw InconsistencyError("catalog embedding failed verification");
      return out;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  throw InconsistencyError("graph not found in the small-graph catalog");
}

CubeEmbedding embed_product(const CubeEmbedding& a, const CubeEmbedding& b) {
  if (!a.verified || !b.verified) throw InputError("product needs verified factor embeddings");
  Integer g, l;
  mpz_gcd(g.get_mpz_t(), a.scale.get_num_mpz_t(), b.scale.get_num_mpz_t());
  mpz_lcm(l.get_mpz_t(), a.scale.get_den_mpz_t(), b.scale.get_den_mpz_t());
  Rational common(g, l);
  common.canonicalize();
  Rational ra = a.scale / common, rb = b.scale / common;
  if (!is_integer(ra) || !is_integer(rb)) throw InconsistencyError("scale replication is not integral");
  std::size_t ka = ra.get_num().get_ui(), kb = rb.get_num().get_ui();
  CubeEmbedding out;
  out.scale = common;
  out.dim = a.dim * ka + b.dim * kb;
  for (const auto& x : a.codes)
    for (const auto& y : b.codes) {
      std::string cx = x, cy = y;
      replicate_bits(cx, ka);
      replicate_bits(cy, kb);
      out.codes.push_back(cx + cy);
    }
  return out;
}

FiniteMetric product_metric(const FiniteMetric& a, const FiniteMetric& b) {
  const std::size_t n = a.n * b.n;
  RationalMatrix d = zero_matrix(n);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < b.n; ++j)
      for (std::size_t k = 0; k < a.n; ++k)
        for (std::size_t l = 0; l < b.n; ++l) d[i * b.n + j][k * b.n + l] = a(i, k) + b(j, l);
  return FiniteMetric(std::move(d));
}

CubeEmbedding embed_lattice_box(const std::vector<std::size_t>& sides) {
  if (sides.empty()) throw InputError("box needs at least one side");
  CubeEmbedding acc;
  FiniteMetric metric;
  for (std::size_t k = 0; k < sides.size(); ++k) {
    if (sides[k] < 1) throw InputError("box sides must be at least 1");
    CubeEmbedding p = embed_path(sides[k] + 1);
    FiniteMetric pm = graph_metric(path_graph(sides[k] + 1));
    if (k == 0) {
      acc = p;
      metric = pm;
      continue;
    }
    acc = embed_product(acc, p);
    metric = product_metric(metric, pm);
    if (!verify_cube_embedding(acc, metric).ok) throw InconsistencyError("lattice embedding failed verification");
  }
  return acc;
}

FiniteMetric lattice_box_metric(const std::vector<std::size_t>& sides) {
  FiniteMetric acc;
  for (std::size_t k = 0; k < sides.size(); ++k) {
    FiniteMetric p = graph_metric(path_graph(sides[k] + 1));
    acc = k == 0 ? p : product_metric(acc, p);
  }
  return acc;
}

std::optional<CubeEmbedding> search_cube_embedding(const FiniteMetric& m, std::size_t dim, const Rational& scale) {
  if (dim > 20) throw InputError("search dimension too large");
  if (m.n == 0) return CubeEmbedding{};
  std::vector<std::vector<long>> need(m.n, std::vector<long>(m.n));
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j) {
      Rational h = m(i, j) / scale;
      if (!is_integer(h) || h < 0 || h > static_cast<long>(dim)) return std::nullopt;
      need[i][j] = h.get_num().get_si();
    }
  // Point 0 sits at the origin without loss of generality.
  std::vector<std::uint32_t> pick(m.n, 0);
  const std::uint32_t limit = 1u << dim;
  std::size_t depth = 1;
  std::vector<std::uint32_t> next(m.n, 0);
  while (depth > 0) {
    if (depth == m.n) break;
    bool advanced = false;
    for (std::uint32_t c = next[depth]; c < limit; ++c) {
      bool ok = true;
      for (std::size_t k = 0; k < depth && ok; ++k) ok = __builtin_popcount(c ^ pick[k]) == need[depth][k];
      if (ok) {
        pick[depth] = c;
        next[depth] = c + 1;
        ++depth;
        if (depth < m.n) next[depth] = 0;
        advanced = true;
        break;
      }
    }
    if (!advanced) --depth;
  }
  if (depth != m.n) return std::nullopt;
  CubeEmbedding out;
  out.dim = dim;
  out.scale = scale;
  for (std::size_t i = 0; i < m.n; ++i) {
    std::string s(dim, '0');
    for (std::size_t b = 0; b < dim; ++b)
      if ((pick[i] >> b) & 1) s[dim - 1 - b] = '1';
    out.codes.push_back(s);
  }
  verify_cube_embedding(out, m);
  return out;
}

}  // namespace metriclab
