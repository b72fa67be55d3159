#include "metriclab/reproduce.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "metriclab/ell1.hpp"
#include "metriclab/euclidean.hpp"
#include "metriclab/hamming.hpp"
#include "metriclab/scale_embed.hpp"

namespace metriclab {

FiniteMetric k33_minus_edge_metric() {
  GraphSpec g = complete_bipartite(3, 3), h(6, {});
  for (const auto& e : g.edges)
    if (!((e.u == 0 && e.v == 3) || (e.u == 3 && e.v == 0))) h.edges.push_back(e);
  return graph_metric(h);
}

namespace {

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Checker {
  CriterionResult& r;
  void operator()(bool ok, std::string line) {
    r.details.push_back(std::string(ok ? "ok   " : "FAIL ") + line);
    if (!ok) r.pass = false;
  }
};

const char* yes(bool b) { return b ? "yes" : "no"; }

// ---- 1 -----------------------------------------------------------------------------------------

void entropic_lp(CriterionResult& r, const ReproduceOptions& opt) {
  Checker check{r};
  FiniteMetric m = k33_minus_edge_metric();
  auto sum0 = embeddability_lp(m, MetricVariant::Sum, Rational(0));
  check(sum0.vars == 64 && sum0.cone_rows == 432,
        fmt("census: %zu variables, %zu cone inequalities, %zu metric rows", sum0.vars, sum0.cone_rows, sum0.metric_rows));
  std::string text = serialize_artifact(*sum0.sum_result);
  FeasibilityResult back = parse_artifact(text);
  ConstraintSystem s0 = embeddability_system(m, MetricVariant::Sum, Rational(0));
  bool verified = sum0.verdict == Verdict::Infeasible && verify_certificate(s0, back).ok;
  check(verified, fmt("sum variant, eps 0: %s, certificate re-verified from text: %s, digest %.16s",
                      sum0.verdict == Verdict::Infeasible ? "infeasible" : "feasible", yes(verified),
                      sum0.certificate_digest.c_str()));
  if (!opt.sidecar_dir.empty()) {
    std::filesystem::create_directories(opt.sidecar_dir);
    std::string path = opt.sidecar_dir + "/" + sum0.certificate_digest + ".cert";
    std::ofstream(path) << "case 0\n" << text;
    r.details.push_back("     certificate: " + path);
  }

  auto band = embeddability_lp(m, MetricVariant::Sum, make_rational(1, 20));
  bool band_ok = band.verdict == Verdict::Infeasible &&
                 verify_certificate(embeddability_system(m, MetricVariant::Sum, make_rational(1, 20)), *band.sum_result).ok;
  check(band_ok, fmt("sum variant, eps 0.05 (metric band): %s", band_ok ? "infeasible, verified" : "not obstructed"));

  EmbeddabilityOptions mo;
  mo.workers = opt.workers;
  auto mx = embeddability_lp(m, MetricVariant::Max, Rational(0), mo);
  std::size_t disagreed = 0, confirmed_fast = 0;
  for (const auto& c : mx.cases) {
    disagreed += c.float_disagreed;
    confirmed_fast += c.route != "full";
  }
  check(mx.cases_total == 32768 && mx.cases_infeasible == mx.cases_total,
        fmt("max variant: %zu/%zu cases infeasible, all certificates exact (%zu via float basis, %zu float disagreements)",
            mx.cases_infeasible, mx.cases_total, confirmed_fast, disagreed));
  r.details.push_back("     max-variant digest " + mx.certificate_digest);
}

// ---- 2 -----------------------------------------------------------------------------------------

void xor_witness(CriterionResult& r) {
  Checker check{r};
  auto h = joint_entropy_vector(k33_xor_witness().dist);
  FiniteMetric d = info_distance_matrix(h);
  FiniteMetric g = graph_metric(complete_bipartite(3, 3));
  std::size_t equal = 0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) equal += d(i, j) == g(i, j);
  check(equal == 36, fmt("info distance equals the K33 path metric in %zu/36 entries", equal));
  double slack = min_cone_slack(h);
  check(slack >= -1e-12, fmt("432 cone inequalities, minimum slack %.3g", slack));
}

// ---- 3 -----------------------------------------------------------------------------------------

void cnd_witnesses(CriterionResult& r) {
  Checker check{r};
  CertifiedReal v = star_witness_value(4, Rational(1));
  CertifiedReal w = star_witness_direct(4, Rational(1));
  check(v.is_exact() && *v.exact == 6 && w.is_exact() && *w.exact == 6,
        "c = (3,-1,-1,-1) on the squared 4-string Hamming matrix: c^T M c = " + v.to_string());

  std::size_t total = 0, agree = 0, cross = 0;
  for (std::size_t m = 2; m <= 6; ++m)
    for (std::size_t n = 2; n <= 6; ++n)
      for (int k = 1; k <= 10; ++k) {
        Rational alpha = make_rational(k, 10);
        KmnResult res = kmn_threshold(m, n, alpha);
        double f = (2.0 - 1.0 / m - 1.0 / n) * std::pow(4.0, k / 10.0) - 2;
        bool expect = std::fabs(f) < 1e-12 ? (res.form_value.is_exact() && *res.form_value.exact <= 0) : f <= 0;
        ++total;
        agree += res.euclidean == expect;
        cross += res.cross_check_agrees;
      }
  check(agree == total && cross == total,
        fmt("K_{m,n}, 2 <= m,n <= 6, alpha in {0.1..1}: %zu/%zu match the sign formula, %zu/%zu agree with the CND test",
            agree, total, cross, total));

  Rational lo = make_rational(1, 4), hi = make_rational(7, 20);
  while (Rational(hi - lo).get_d() > 1e-11) {
    Rational mid = (lo + hi) / 2;
    mid.canonicalize();
    if (kmn_threshold(3, 3, mid).euclidean)
      lo = mid;
    else
      hi = mid;
  }
  double boundary = Rational((lo + hi) / 2).get_d(), want = std::log(1.5) / std::log(4.0);
  check(std::fabs(boundary - want) <= 1e-9, fmt("K33 boundary %.12f, log_4(3/2) = %.12f", boundary, want));
}

// ---- 4 -----------------------------------------------------------------------------------------

GraphSpec random_tree(std::mt19937_64& rng, std::size_t n) {
  GraphSpec g;
  g.n = n;
  std::uniform_int_distribution<int> w(1, 5);
  for (std::size_t v = 1; v < n; ++v) g.add_edge(v, std::uniform_int_distribution<std::size_t>(0, v - 1)(rng), w(rng));
  return g;
}

void hamming_suite(CriterionResult& r) {
  Checker check{r};
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(404);
  std::size_t trees = 0;
  for (int k = 0; k < 100; ++k) {
    GraphSpec t = random_tree(rng, 1 + k % 10);
    CubeEmbedding e = embed_tree(t);
    trees += verify_cube_embedding(e, graph_metric(t)).ok;
  }
  check(trees == 100, fmt("random weighted trees: %zu/100 exact", trees));

  std::size_t paths = 0;
  for (std::size_t m = 1; m <= 32; ++m) {
    CubeEmbedding e = embed_path(m);
    paths += verify_cube_embedding(e, graph_metric(path_graph(m))).ok;
  }
  check(paths == 32, fmt("paths m <= 32: %zu/32 exact", paths));

  std::size_t rings = 0;
  for (std::size_t n = 3; n <= 20; ++n) {
    CubeEmbedding e = embed_ring(n);
    rings += verify_cube_embedding(e, ring_metric(n)).ok;
  }
  check(rings == 18, fmt("rings 3 <= n <= 20: %zu/18 exact", rings));

  std::size_t four = 0, four_total = 0;
  for (const auto& entry : small_graph_catalog()) {
    if (entry.n != 4) continue;
    ++four_total;
    GraphSpec g = catalog_graph(entry);
    CubeEmbedding e = embed_small_graph(g);
    four += verify_cube_embedding(e, graph_metric(g)).ok;
  }
  check(four_total == 6 && four == 6, fmt("connected 4-node graphs: %zu/%zu exact", four, four_total));

  std::size_t prods = 0;
  for (int k = 0; k < 50; ++k) {
    auto part = [&](int kind) -> std::pair<CubeEmbedding, FiniteMetric> {
      std::size_t n = 2 + rng() % 4;
      if (kind == 0) {
        GraphSpec t = random_tree(rng, n);
        return {embed_tree(t), graph_metric(t)};
      }
      if (kind == 1) return {embed_path(n), graph_metric(path_graph(n))};
      return {embed_ring(n + 1), ring_metric(n + 1)};
    };
    auto [ea, ma] = part(k % 3);
    auto [eb, mb] = part((k / 3) % 3);
    CubeEmbedding p = embed_product(ea, eb);
    prods += verify_cube_embedding(p, product_metric(ma, mb)).ok;
  }
  check(prods == 50, fmt("random products: %zu/50 exact", prods));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  check(secs <= 10, fmt("runtime %.2f s (limit 10 s)", secs));
}

// ---- 5 -----------------------------------------------------------------------------------------

void four_point(CriterionResult& r) {
  Checker check{r};
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> num(1, 100), den(1, 4);
  std::size_t ok = 0, fallback = 0;
  for (int k = 0; k < 1000;) {
    RationalMatrix d = zero_matrix(4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) d[i][j] = d[j][i] = make_rational(num(rng), den(rng));
    FiniteMetric m(d);
    if (!validate_metric(m).is_metric()) continue;
    ++k;
    L1Embedding4 e = embed_four_point(m);
    ok += verify_four_point(e, m);
    fallback += e.method == L1Method::SignSearch;
  }
  check(ok == 1000, fmt("random rational 4-point metrics: %zu/1000 exact (%zu needed the sign search)", ok, fallback));

  FiniteMetric c4 = ring_metric(4);
  L1Embedding4 e = embed_four_point(c4);
  check(e.method == L1Method::SignSearch && verify_four_point(e, c4),
        std::string("4-cycle: method ") + l1_method_name(e.method) + ", exact " + yes(verify_four_point(e, c4)));
}

// ---- 6 -----------------------------------------------------------------------------------------

void discrepancy(CriterionResult& r) {
  Checker check{r};
  std::size_t bad = 0;
  double worst = 1e300;
  std::size_t worst_k = 0;
  for (int k = 0; k <= 1000; ++k) {
    DiscrepancySweep sw = discrepancy_sweep(make_rational(k, 1000), std::size_t{1} << 16);
    if (sw.first_violation) ++bad;
    if (sw.worst_slack < worst) {
      worst = sw.worst_slack;
      worst_k = static_cast<std::size_t>(k);
    }
  }
  check(bad == 0, fmt("1001 values of r, all s <= 65536: %zu violations, tightest slack %.4f at r = %zu/1000", bad, worst,
                      worst_k));
}

// ---- 7 -----------------------------------------------------------------------------------------

DomainPoint corner(unsigned bits, std::size_t m) {
  DomainPoint p;
  for (std::size_t i = 0; i < m; ++i) p.push_back(Rational((bits >> (m - 1 - i)) & 1));
  return p;
}

void scale_band(CriterionResult& r, const ScaleReport& rep, const std::string& what) {
  Checker check{r};
  check(rep.fraction_in_band >= 0.95 && rep.rank_correlation >= 0.95,
        fmt("%s: %zu/%zu ratios in [0.7, 1.3], rank correlation %.3f (Spearman %.3f), codec %s", what.c_str(), rep.in_band,
            rep.rated, rep.rank_correlation, rep.spearman, rep.codec.c_str()));
}

void compressor_embeddings(CriterionResult& r, const ReproduceOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  Lz77Codec lz;
  {
    auto e = hamming_scale_embed(8, 1024, 21);
    std::vector<DomainPoint> pts;
    for (unsigned c : {0u, 1u, 3u, 7u, 15u, 85u, 170u, 255u}) pts.push_back(corner(c, 8));
    scale_band(r, verify_scale_embedding(*e, pts, {1024, 4096, 16384}, lz, 0.7, 1.3, opt.workers),
               "cube m=8, 8 corners, s in {1024, 4096, 16384}, seed 21");
  }
  {
    auto e = interval_string_embedder(16384, 31);
    std::vector<DomainPoint> pts;
    for (int k = 0; k <= 4; ++k) pts.push_back({make_rational(k, 4)});
    scale_band(r, verify_scale_embedding(*e, pts, {16384}, lz, 0.7, 1.3, opt.workers),
               "interval, 5 grid points, s = 16384, seed 31");
  }
  {
    auto e = box_scale_embed({{Rational(0), Rational(1)}, {Rational(0), Rational(1)}}, 8192, 41);
    std::vector<DomainPoint> pts{{Rational(0), Rational(0)}, {Rational(1), Rational(0)}, {Rational(0), Rational(1)},
                                 {Rational(1), Rational(1)}};
    scale_band(r, verify_scale_embedding(*e, pts, {8192}, lz, 0.7, 1.3, opt.workers),
               "box [0,1]^2, 4 corners, s = 8192, seed 41");
  }
  {
    const std::size_t s = 2048;
    auto re = xor_random_embedding(s);
    Lz77Codec lzx(true);
    scale_band(r, verify_strings({derandomize_sample(re, 51)}, {s}, re.metric, lzx, 0.7, 1.3, opt.workers),
               "derandomized XOR, s = 2048, seed 51");
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Checker{r}(secs <= 300, fmt("runtime %.1f s (limit 300 s)", secs));
}

// ---- 8 -----------------------------------------------------------------------------------------

void euclidean_roundtrip(CriterionResult& r) {
  Checker check{r};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::size_t ok = 0;
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    std::size_t n = 2 + k % 9, dim = 1 + k % 5;
    PointSet src;
    src.points.assign(n, std::vector<double>(dim));
    for (auto& p : src.points)
      for (auto& x : p) x = u(rng);
    auto d = distance_matrix(src);
    PointSet got = realize_euclidean(d);
    bool good = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double rel = std::fabs(got.distance(i, j) - d[i][j]) / d[i][j];
        worst = std::max(worst, rel);
        good = good && rel <= 1e-9;
      }
    ok += good;
  }
  check(ok == 100, fmt("random distance matrices: %zu/100 round-trip, worst relative error %.2e", ok, worst));

  std::vector<std::string> cube;
  for (unsigned c = 0; c < 8; ++c) cube.push_back(std::string{char('0' + (c >> 2 & 1)), char('0' + (c >> 1 & 1)), char('0' + (c & 1))});
  bool root = is_euclidean_power(hamming_metric(cube), make_rational(1, 2)).euclidean;
  check(root, std::string("sqrt(d_H) on B^3 is Euclidean: ") + yes(root));
  bool fam = is_euclidean(hamming_metric(one_hot_family(4))).euclidean;
  check(!fam, std::string("d_H on the 4-string family is Euclidean: ") + yes(fam));
}

// ---- 9 -----------------------------------------------------------------------------------------

void montecarlo(CriterionResult& r, const ReproduceOptions& opt) {
  Checker check{r};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    PointSet src;
    src.points.assign(5, std::vector<double>(3));
    for (auto& p : src.points)
      for (auto& x : p) x = u(rng);
    PointSet img = l2_to_l1_montecarlo(src, 200000, 900 + k, static_cast<unsigned>(opt.workers));
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i + 1; j < 5; ++j)
        worst = std::max(worst, std::fabs(img.distance(i, j) - src.distance(i, j)) / src.distance(i, j));
  }
  check(worst <= 0.02, fmt("10 point sets, N = 200000, seeds 900..909: worst relative l1/l2 error %.4f", worst));
}

// ---- 10 ----------------------------------------------------------------------------------------

void frechet(CriterionResult& r) {
  Checker check{r};
  std::mt19937_64 rng(10);
  std::size_t ok = 0;
  for (int k = 0; k < 100; ++k) {
    std::size_t n = 1 + k % 12;
    GraphSpec g = random_tree(rng, n);
    std::uniform_int_distribution<int> w(1, 9);
    for (std::size_t e = 0; e < n; ++e) {
      std::size_t a = rng() % n, b = rng() % n;
      if (a != b) g.add_edge(a, b, make_rational(w(rng), 1 + static_cast<long>(rng() % 3)));
    }
    FiniteMetric m = graph_metric(g);
    auto pts = frechet_embed(m, k % n);
    bool good = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) good = good && linf_distance(pts[i], pts[j]) == m(i, j);
    ok += good;
  }
  check(ok == 100, fmt("random metrics n <= 12: %zu/100 recovered exactly in l_inf", ok));
}

const char* kNames[kCriterionCount] = {"entropic LP obstruction for K33 minus an edge",
                                       "XOR witness exactness",
                                       "CND witnesses and the K_{m,n} threshold",
                                       "Hamming-cube embeddings",
                                       "four-point l1 embeddings",
                                       "low-discrepancy bound",
                                       "compressor-measured scale embeddings",
                                       "Euclidean realization round trip",
                                       "Monte Carlo l2 to l1",
                                       "Frechet embedding"};

}  // namespace

CriterionResult run_criterion(int id, const ReproduceOptions& opt) {
  if (id < 1 || id > kCriterionCount) throw InputError("criterion id must be 1.." + std::to_string(kCriterionCount));
  CriterionResult r;
  r.id = id;
  r.name = kNames[id - 1];
  r.pass = true;
  auto t0 = std::chrono::steady_clock::now();
  try {
    switch (id) {
      case 1: entropic_lp(r, opt); break;
      case 2: xor_witness(r); break;
      case 3: cnd_witnesses(r); break;
      case 4: hamming_suite(r); break;
      case 5: four_point(r); break;
      case 6: discrepancy(r); break;
      case 7: compressor_embeddings(r, opt); break;
      case 8: euclidean_roundtrip(r); break;
      case 9: montecarlo(r, opt); break;
      case 10: frechet(r); break;
    }
  } catch (const std::exception& e) {
    r.pass = false;
    r.details.push_back(std::string("FAIL exception: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opt.on_result) opt.on_result(r);
  return r;
}

std::vector<CriterionResult> reproduce_suite(const ReproduceOptions& opt) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) out.push_back(run_criterion(id, opt));
  return out;
}

}  // namespace metriclab
