#include "metriclab.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "json.hpp"
#include "metriclab/ell1.hpp"
#include "metriclab/entropic.hpp"
#include "metriclab/euclidean.hpp"
#include "metriclab/hamming.hpp"
#include "metriclab/prng.hpp"
#include "metriclab/reproduce.hpp"
#include "metriclab/scale_embed.hpp"

using json = nlohmann::json;
using namespace metriclab;

struct ml_context {
  std::string error;
  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::string codec_name = "lz77";
  std::shared_ptr<const Codec> codec = make_codec("lz77");
};

struct ml_metric {
  FiniteMetric m;
  std::optional<GraphSpec> graph;
  std::string origin;
};

namespace {

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::string q(const Rational& r) { return to_string(r); }

json matrix_json(const RationalMatrix& d) {
  json rows = json::array();
  for (const auto& row : d) {
    json r = json::array();
    for (const auto& x : row) r.push_back(q(x));
    rows.push_back(r);
  }
  return rows;
}

Rational rational_of(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw InputError("expected a rational as \"p/q\" or an integer");
}

std::size_t suffix_number(const std::string& name, const std::string& prefix) {
  std::string tail = name.substr(prefix.size());
  if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos)
    throw InputError("bad size in built-in name '" + name + "'");
  return std::stoul(tail);
}

GraphSpec k33_minus_edge_graph() {
  GraphSpec g = complete_bipartite(3, 3), h(6, {});
  for (const auto& e : g.edges)
    if (!((e.u == 0 && e.v == 3) || (e.u == 3 && e.v == 0))) h.edges.push_back(e);
  return h;
}

std::optional<GraphSpec> builtin_graph(const std::string& name) {
  if (name == "k33") return complete_bipartite(3, 3);
  if (name == "k32") return complete_bipartite(3, 2);
  if (name == "k33-minus-edge") return k33_minus_edge_graph();
  if (name.rfind("ring-", 0) == 0) return ring_graph(suffix_number(name, "ring-"));
  if (name.rfind("path-", 0) == 0) return path_graph(suffix_number(name, "path-"));
  for (const auto& e : small_graph_catalog())
    if (e.name == name) return catalog_graph(e);
  return std::nullopt;
}

std::vector<std::string> cube_strings(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < (std::size_t{1} << n); ++c) {
    std::string s(n, '0');
    for (std::size_t k = 0; k < n; ++k)
      if ((c >> (n - 1 - k)) & 1) s[k] = '1';
    out.push_back(s);
  }
  return out;
}

GraphSpec graph_of(const json& j) {
  GraphSpec g;
  g.n = j.at("n").get<std::size_t>();
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3) throw InputError("edges are [u, v] or [u, v, \"w\"]");
    g.add_edge(e[0].get<std::size_t>(), e[1].get<std::size_t>(), e.size() == 3 ? rational_of(e[2]) : Rational(1));
  }
  return g;
}

ml_metric load_metric(const std::string& spec) {
  ml_metric out;
  out.origin = spec;
  std::size_t first = spec.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && spec[first] == '{') {
    json j = json::parse(spec);
    if (j.contains("d")) {
      RationalMatrix d;
      for (const auto& row : j.at("d")) {
        RationalVector r;
        for (const auto& x : row) r.push_back(rational_of(x));
        d.push_back(r);
      }
      std::vector<std::string> labels;
      if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
      out.m = FiniteMetric(d, labels);
      return out;
    }
    if (j.contains("edges")) {
      out.graph = graph_of(j);
      out.m = graph_metric(*out.graph);
      return out;
    }
    throw InputError("metric JSON needs \"d\" or a graph with \"n\" and \"edges\"");
  }
  if (auto g = builtin_graph(spec)) {
    out.graph = g;
    out.m = graph_metric(*g);
    return out;
  }
  if (spec.rfind("d01-", 0) == 0) {
    out.m = discrete_metric(suffix_number(spec, "d01-"));
    return out;
  }
  if (spec.rfind("cube-", 0) == 0) {
    std::size_t n = suffix_number(spec, "cube-");
    if (n > 10) throw InputError("cube-N supports N <= 10");
    out.m = hamming_metric(cube_strings(n));
    return out;
  }
  if (spec == "hamming4") {
    out.m = hamming_metric(one_hot_family(4));
    return out;
  }
  throw InputError("unknown metric '" + spec + "'");
}

GraphSpec load_graph(const std::string& spec) {
  std::size_t first = spec.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && spec[first] == '{') return graph_of(json::parse(spec));
  if (auto g = builtin_graph(spec)) return *g;
  throw InputError("unknown graph '" + spec + "'");
}

json axioms_json(const AxiomReport& a) {
  json j = {{"positivity", a.positivity}, {"zero_diagonal", a.zero_diagonal}, {"non_degenerate", a.non_degenerate},
            {"symmetric", a.symmetric},   {"triangle", a.triangle},           {"is_metric", a.is_metric()},
            {"is_semimetric", a.is_semimetric()}, {"undecided", a.undecided}};
  json w = json::object();
  if (a.positivity_witness) w["positivity"] = *a.positivity_witness;
  if (a.zero_witness) w["zero_diagonal"] = *a.zero_witness;
  if (a.degenerate_witness) w["non_degenerate"] = *a.degenerate_witness;
  if (a.symmetry_witness) w["symmetric"] = *a.symmetry_witness;
  if (a.triangle_witness) w["triangle"] = *a.triangle_witness;
  j["witnesses"] = w;
  return j;
}

json real_json(const CertifiedReal& x) {
  json j = {{"approx", x.approx()}, {"exact", x.is_exact()}};
  if (x.is_exact())
    j["value"] = q(*x.exact);
  else
    j["enclosure"] = {x.bounds.lower(), x.bounds.upper()};
  return j;
}

json cnd_json(const CndResult& c) {
  json j = {{"verdict", c.is_cnd ? "CND" : "not CND"},
            {"is_cnd", c.is_cnd},
            {"certified", c.certified},
            {"exact", c.exact},
            {"min_eigenvalue", c.min_eigenvalue},
            {"max_eigenvalue", c.max_eigenvalue}};
  if (c.witness) {
    json w = json::array();
    for (const auto& x : *c.witness) w.push_back(q(x));
    j["witness"] = w;
  }
  if (c.form_value) j["form_value"] = real_json(*c.form_value);
  return j;
}

json points_json(const PointSet& p) {
  json j = json::array();
  for (const auto& v : p.points) j.push_back(v);
  return j;
}

std::string hex(const Bytes& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto c : b) {
    s += digits[c >> 4];
    s += digits[c & 15];
  }
  return s;
}

DomainPoint point_of(const json& v) {
  DomainPoint p;
  if (v.is_array())
    for (const auto& x : v) p.push_back(rational_of(x));
  else
    p.push_back(rational_of(v));
  return p;
}

EmbedderPtr embedder_of(const json& j, std::uint64_t seed) {
  std::string kind = j.at("kind").get<std::string>();
  std::size_t s = j.value("s", std::size_t{1024});
  if (kind == "cube") return hamming_scale_embed(j.at("m").get<std::size_t>(), s, seed);
  if (kind == "interval") return interval_string_embedder(s, seed);
  if (kind == "sequence") return interval_sequence_embedder(s, seed);
  if (kind == "simplex") return simplex_scale_embed(j.at("m").get<std::size_t>(), s, seed);
  if (kind == "box") {
    std::vector<std::pair<Rational, Rational>> bounds;
    for (const auto& b : j.at("bounds")) bounds.emplace_back(rational_of(b.at(0)), rational_of(b.at(1)));
    return box_scale_embed(bounds, s, seed);
  }
  throw InputError("unknown embedder kind '" + kind + "'");
}

std::vector<DomainPoint> points_of(const json& j) {
  std::vector<DomainPoint> pts;
  for (const auto& p : j.at("points")) pts.push_back(point_of(p));
  if (pts.empty()) throw InputError("no points given");
  return pts;
}

MetricVariant variant_of(const char* v) {
  std::string s = v ? v : "sum";
  if (s == "sum") return MetricVariant::Sum;
  if (s == "max") return MetricVariant::Max;
  throw InputError("variant must be sum or max");
}

EpsMode mode_of(const char* m) {
  std::string s = m ? m : "metric_band";
  for (EpsMode e : {EpsMode::MetricBand, EpsMode::BothRelaxed, EpsMode::Normalized})
    if (s == eps_mode_name(e)) return e;
  throw InputError("mode must be metric_band, both_relaxed or normalized");
}

Rational rational_arg(const char* s, const Rational& fallback) { return s ? parse_rational(s) : fallback; }

JointDistribution distribution_of(const std::string& spec) {
  if (spec == "xor") return k33_xor_witness().dist;
  if (spec.rfind("cut:", 0) == 0) {
    std::vector<int> side;
    for (char c : spec.substr(4)) {
      if (c != '0' && c != '1') throw InputError("cut sides are written as a 0/1 string");
      side.push_back(c - '0');
    }
    return cut_metric_witness(side);
  }
  json j = json::parse(spec);
  std::vector<std::size_t> alph = j.at("alphabets").get<std::vector<std::size_t>>();
  if (j.contains("m") && j.at("m").get<std::size_t>() != alph.size()) throw InputError("m does not match alphabets");
  std::vector<Rational> table;
  for (const auto& x : j.at("table")) {
    if (x.is_array())
      for (const auto& y : x) table.push_back(rational_of(y));
    else
      table.push_back(rational_of(x));
  }
  return JointDistribution(alph, table);
}

template <class F>
ml_status guarded(ml_context* ctx, F&& f) {
  if (ctx) ctx->error.clear();
  try {
    return f();
  } catch (const InputError& e) {
    if (ctx) ctx->error = e.what();
    return ML_INPUT_ERROR;
  } catch (const json::exception& e) {
    if (ctx) ctx->error = std::string("JSON: ") + e.what();
    return ML_INPUT_ERROR;
  } catch (const std::invalid_argument& e) {
    if (ctx) ctx->error = e.what();
    return ML_INPUT_ERROR;
  } catch (const std::exception& e) {
    if (ctx) ctx->error = e.what();
    return ML_INTERNAL_ERROR;
  } catch (...) {
    if (ctx) ctx->error = "unknown failure";
    return ML_INTERNAL_ERROR;
  }
}

ml_status emit(const json& j, char** out, bool positive = true) {
  if (out) *out = dup(j.dump(2));
  return positive ? ML_OK : ML_NEGATIVE;
}

#define ML_REQUIRE(cond, msg) \
  if (!(cond)) throw InputError(msg)

}  // namespace

extern "C" {

const char* ml_version(void) { return "0.4.0"; }

ml_context* ml_context_new(void) {
  try {
    return new ml_context();
  } catch (...) {
    return nullptr;
  }
}

void ml_context_free(ml_context* ctx) { delete ctx; }

const char* ml_last_error(const ml_context* ctx) { return ctx ? ctx->error.c_str() : "no context"; }

void ml_set_workers(ml_context* ctx, unsigned workers) {
  if (ctx) ctx->workers = workers == 0 ? 1 : workers;
}

void ml_set_seed(ml_context* ctx, uint64_t seed) {
  if (ctx) ctx->seed = seed;
}

ml_status ml_set_codec(ml_context* ctx, const char* name) {
  return guarded(ctx, [&] {
    ML_REQUIRE(ctx && name, "codec name is required");
    ctx->codec = make_codec(name);
    ctx->codec_name = name;
    return ML_OK;
  });
}

void ml_free_string(char* s) { std::free(s); }

ml_status ml_metric_load(ml_context* ctx, const char* spec, ml_metric** out) {
  return guarded(ctx, [&] {
    ML_REQUIRE(spec && out, "metric spec and output are required");
    *out = new ml_metric(load_metric(spec));
    return ML_OK;
  });
}

void ml_metric_free(ml_metric* m) { delete m; }

size_t ml_metric_size(const ml_metric* m) { return m ? m->m.n : 0; }

ml_status ml_metric_entry(ml_context* ctx, const ml_metric* m, size_t i, size_t j, char** out) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m && out, "metric and output are required");
    ML_REQUIRE(i < m->m.n && j < m->m.n, "index out of range");
    *out = dup(q(m->m(i, j)));
    return ML_OK;
  });
}

ml_status ml_metric_to_json(ml_context* ctx, const ml_metric* m, char** out) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m, "metric is required");
    json j = {{"n", m->m.n}, {"d", matrix_json(m->m.d)}};
    if (!m->m.labels.empty()) j["labels"] = m->m.labels;
    return emit(j, out);
  });
}

ml_status ml_builtin_names(ml_context* ctx, char** out) {
  return guarded(ctx, [&] {
    json names = {"k33", "k33-minus-edge", "k32", "ring-N", "path-N", "d01-N", "cube-N", "hamming4"};
    for (const auto& e : small_graph_catalog()) names.push_back(e.name);
    return emit(names, out);
  });
}

ml_status ml_validate(ml_context* ctx, const ml_metric* m, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m, "metric is required");
    AxiomReport a = validate_metric(m->m);
    json j = axioms_json(a);
    j["n"] = m->m.n;
    j["verdict"] = a.is_metric() ? "metric" : (a.is_semimetric() ? "semimetric" : "not a metric");
    return emit(j, report, a.is_metric());
  });
}

ml_status ml_cnd(ml_context* ctx, const ml_metric* m, const char* exponent, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m, "metric is required");
    Rational e = rational_arg(exponent, Rational(1));
    CndResult c = e == 1 ? is_cnd(m->m.d) : is_cnd_power(m->m.d, e);
    json j = cnd_json(c);
    j["exponent"] = q(e);
    return emit(j, report, c.is_cnd);
  });
}

ml_status ml_euclidean(ml_context* ctx, const ml_metric* m, const char* alpha, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m, "metric is required");
    Rational a = rational_arg(alpha, Rational(1));
    EuclideanVerdict v = a == 1 ? is_euclidean(m->m) : is_euclidean_power(m->m, a);
    json j = {{"alpha", q(a)},
              {"euclidean", v.euclidean},
              {"verdict", v.euclidean ? "Euclidean" : "not Euclidean"},
              {"axioms", axioms_json(v.axioms)},
              {"cnd_of_square", cnd_json(v.cnd)}};
    return emit(j, report, v.euclidean);
  });
}

ml_status ml_kmn(ml_context* ctx, size_t m, size_t n, const char* alpha, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(alpha, "alpha is required");
    Rational a = parse_rational(alpha);
    KmnResult r = kmn_threshold(m, n, a);
    json j = {{"m", m},
              {"n", n},
              {"alpha", q(a)},
              {"euclidean", r.euclidean},
              {"verdict", r.euclidean ? "Euclidean" : "not Euclidean"},
              {"form_value", real_json(r.form_value)},
              {"cnd_verdict", r.cnd_verdict},
              {"cross_check_agrees", r.cross_check_agrees},
              {"boundary", std::log((2.0) / (2.0 - 1.0 / m - 1.0 / n)) / std::log(4.0)}};
    return emit(j, report);
  });
}

ml_status ml_realize(ml_context* ctx, const ml_metric* m, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m, "metric is required");
    EuclideanVerdict v = is_euclidean(m->m);
    if (!v.euclidean) return emit(json{{"euclidean", false}, {"verdict", "not Euclidean"}}, report, false);
    PointSet p = realize_euclidean(m->m);
    json j = {{"euclidean", true}, {"verdict", "Euclidean"}, {"dimension", p.dimension()}, {"points", points_json(p)}};
    return emit(j, report);
  });
}

ml_status ml_frechet(ml_context* ctx, const ml_metric* m, size_t base, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m, "metric is required");
    ML_REQUIRE(base < m->m.n, "base point out of range");
    auto pts = frechet_embed(m->m, base);
    json j = json::array();
    for (const auto& p : pts) {
      json row = json::array();
      for (const auto& x : p) row.push_back(q(x));
      j.push_back(row);
    }
    return emit(json{{"norm", "linf"}, {"points", j}}, report);
  });
}

ml_status ml_embed_cube(ml_context* ctx, const char* graph_spec, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(graph_spec, "graph is required");
    std::string spec = graph_spec;
    GraphSpec g = load_graph(spec);
    FiniteMetric target = graph_metric(g);
    CubeEmbedding e;
    std::string method;
    if (spec.rfind("path-", 0) == 0) {
      e = embed_path(g.n);
      method = "path";
    } else if (spec.rfind("ring-", 0) == 0) {
      e = embed_ring(g.n);
      method = "ring";
    } else if (g.edges.size() + 1 == g.n) {
      e = embed_tree(g);
      method = "tree";
    } else if (g.n <= 4) {
      e = embed_small_graph(g);
      method = "catalog";
    } else {
      throw InputError("no cube construction for this graph; trees, paths, rings and graphs on <= 4 nodes are supported");
    }
    CubeCheck c = verify_cube_embedding(e, target);
    json j = {{"method", method}, {"dim", e.dim}, {"scale", q(e.scale)}, {"codes", e.codes}, {"verified", c.ok}};
    if (!c.ok) j["reason"] = c.reason;
    return emit(j, report, c.ok);
  });
}

ml_status ml_embed_4pt(ml_context* ctx, const ml_metric* m, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m, "metric is required");
    L1Embedding4 e = embed_four_point(m->m);
    json pts = json::array();
    for (const auto& p : e.points) {
      json row = json::array();
      for (const auto& x : p) row.push_back(q(x));
      pts.push_back(row);
    }
    bool ok = verify_four_point(e, m->m);
    json j = {{"method", l1_method_name(e.method)}, {"permutation", e.permutation}, {"points", pts}, {"verified", ok}};
    return emit(j, report, ok);
  });
}

ml_status ml_embed_scale(ml_context* ctx, const char* params, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(params, "parameters are required");
    json p = json::parse(params);
    EmbedderPtr e = embedder_of(p, ctx->seed);
    json strings = json::array();
    for (const auto& pt : points_of(p)) {
      BitString b = e->emit(pt);
      strings.push_back({{"bits", b.bits}, {"hex", hex(b.bytes)}});
    }
    json j = {{"kind", e->kind()}, {"s", e->scale}, {"seed", ctx->seed}, {"strings", strings}, {"warnings", e->warnings}};
    return emit(j, report);
  });
}

ml_status ml_verify_scale(ml_context* ctx, const char* params, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(params, "parameters are required");
    json p = json::parse(params);
    std::vector<std::size_t> scales = p.value("scales", std::vector<std::size_t>{p.value("s", std::size_t{1024})});
    ML_REQUIRE(!scales.empty(), "no scales given");
    json band = p.value("band", json::array({0.7, 1.3}));
    double lo = band.at(0).get<double>(), hi = band.at(1).get<double>();
    ScaleReport rep;
    if (p.value("kind", std::string()) == "xor") {
      std::vector<std::vector<Bytes>> strings;
      for (std::size_t s : scales) strings.push_back(derandomize_sample(xor_random_embedding(s), ctx->seed));
      rep = verify_strings(strings, scales, xor_random_embedding(1).metric, *ctx->codec, lo, hi, ctx->workers);
    } else {
      json base = p;
      base["s"] = scales.front();
      EmbedderPtr e = embedder_of(base, ctx->seed);
      rep = verify_scale_embedding(*e, points_of(p), scales, *ctx->codec, lo, hi, ctx->workers);
    }
    json rows = json::array();
    for (const auto& r : rep.rows)
      rows.push_back({{"i", r.i}, {"j", r.j}, {"s", r.s}, {"target", q(r.target)}, {"d_hat", r.d_hat}, {"ratio", r.ratio},
                      {"excluded", r.excluded}});
    bool pass = rep.fraction_in_band >= 0.95 && rep.rank_correlation >= 0.95 && rep.zero_pairs_ok;
    json j = {{"codec", rep.codec},
              {"seed", ctx->seed},
              {"band", {rep.band_lo, rep.band_hi}},
              {"rated", rep.rated},
              {"in_band", rep.in_band},
              {"fraction_in_band", rep.fraction_in_band},
              {"rank_correlation", rep.rank_correlation},
              {"spearman", rep.spearman},
              {"residual_slope", rep.residual_slope},
              {"zero_pairs_ok", rep.zero_pairs_ok},
              {"verdict", pass ? "pass" : "fail"},
              {"rows", rows}};
    return emit(j, report, pass);
  });
}

ml_status ml_entropy(ml_context* ctx, const char* dist, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(dist, "distribution is required");
    JointDistribution j = distribution_of(dist);
    EntropicVector h = joint_entropy_vector(j);
    json hv = json::array();
    for (const auto& x : h.h) hv.push_back(real_json(x));
    json out = {{"m", j.m}, {"alphabets", j.alphabets}, {"all_exact", h.all_exact()}, {"h", hv}};
    if (j.m >= 2) out["min_cone_slack"] = min_cone_slack(h);
    json dmax = json::array(), davg = json::array();
    for (std::size_t a = 0; a < j.m; ++a) {
      json rm = json::array(), ra = json::array();
      for (std::size_t b = 0; b < j.m; ++b) {
        rm.push_back(real_json(info_distance(h, a, b, InfoVariant::Max)));
        ra.push_back(real_json(info_distance(h, a, b, InfoVariant::Avg)));
      }
      dmax.push_back(rm);
      davg.push_back(ra);
    }
    out["info_distance_max"] = dmax;
    out["info_distance_avg"] = davg;
    return emit(out, report);
  });
}

ml_status ml_lp_embed(ml_context* ctx, const ml_metric* m, const char* variant, const char* eps, const char* mode,
                      const char* sidecar_dir, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m, "metric is required");
    MetricVariant v = variant_of(variant);
    Rational e = rational_arg(eps, Rational(0));
    EmbeddabilityOptions opt;
    opt.mode = mode_of(mode);
    opt.workers = ctx->workers;
    std::ostringstream sidecar;
    if (sidecar_dir)
      opt.on_case = [&](std::uint64_t id, const FeasibilityResult& r) {
        sidecar << "case " << id << "\n" << serialize_artifact(r);
      };
    EmbeddabilityResult r = embeddability_lp(m->m, v, e, opt);
    std::map<std::string, std::size_t> routes;
    std::size_t disagreed = 0;
    for (const auto& c : r.cases) {
      ++routes[c.route];
      disagreed += c.float_disagreed;
    }
    json j = {{"verdict", r.verdict == Verdict::Infeasible ? "infeasible" : "feasible"},
              {"obstructed", r.verdict == Verdict::Infeasible},
              {"variant", v == MetricVariant::Sum ? "sum" : "max"},
              {"mode", eps_mode_name(r.mode)},
              {"eps", q(e)},
              {"cases_total", r.cases_total},
              {"cases_infeasible", r.cases_infeasible},
              {"certificate_digest", r.certificate_digest},
              {"vars", r.vars},
              {"cone_rows", r.cone_rows},
              {"metric_rows", r.metric_rows},
              {"routes", routes},
              {"float_disagreements", disagreed}};
    if (r.first_feasible_case) j["first_feasible_case"] = *r.first_feasible_case;
    if (sidecar_dir) {
      std::filesystem::create_directories(sidecar_dir);
      std::string path = std::string(sidecar_dir) + "/" + r.certificate_digest + ".cert";
      std::ofstream f(path, std::ios::binary);
      f << sidecar.str();
      if (!f) throw std::runtime_error("cannot write " + path);
      j["certificate_path"] = path;
    }
    return emit(j, report);
  });
}

ml_status ml_verify_certificate(ml_context* ctx, const ml_metric* m, const char* variant, const char* eps,
                                const char* mode, const char* text, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m && text, "metric and certificate text are required");
    MetricVariant v = variant_of(variant);
    Rational e = rational_arg(eps, Rational(0));
    EpsMode md = mode_of(mode);
    std::istringstream in(text);
    std::string line, chunk;
    std::size_t checked = 0, ok = 0;
    std::optional<std::uint64_t> id;
    json failures = json::array();
    auto flush = [&] {
      if (!id) return;
      ++checked;
      auto check = verify_certificate(embeddability_system(m->m, v, e, md, *id), parse_artifact(chunk));
      if (check.ok)
        ++ok;
      else
        failures.push_back({{"case", *id}, {"reason", check.reason}});
    };
    while (std::getline(in, line)) {
      if (line.rfind("case ", 0) == 0) {
        flush();
        id = std::stoull(line.substr(5));
        chunk.clear();
      } else {
        chunk += line + "\n";
      }
    }
    flush();
    ML_REQUIRE(checked > 0, "no cases found in the certificate text");
    json j = {{"checked", checked}, {"verified", ok}, {"failures", failures}};
    return emit(j, report, ok == checked);
  });
}

ml_status ml_kraft(ml_context* ctx, size_t count, size_t bits, double radius, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(count >= 1 && bits >= 8, "need at least one string of at least 8 bits");
    std::vector<Bytes> set;
    for (std::size_t k = 0; k < count; ++k) set.push_back(random_string(bits, derive_seed(ctx->seed, k)));
    KraftReport r = kraft_ball_report(set.front(), set, radius, *ctx->codec);
    json j = {{"codec", ctx->codec->name()}, {"count", count},   {"bits", bits},
              {"kraft_sum", r.sum},          {"radius", r.r},     {"ball_count", r.count},
              {"count_within", r.count_within}, {"distances", r.distances}};
    return emit(j, report);
  });
}

ml_status ml_packing(ml_context* ctx, const ml_metric* m, const char* eps, const char* r, double c, double b,
                     size_t s_max, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(m && eps && r, "metric, eps and r are required");
    PackingReport p = packing_obstruction(m->m, parse_rational(eps), parse_rational(r), c, b, s_max);
    json j = {{"packing", p.packing},
              {"max_ball", p.max_ball},
              {"argmax", p.argmax},
              {"obstructed_scales", p.obstructed_scales},
              {"s_max", p.s_max},
              {"obstructed", !p.obstructed_scales.empty()}};
    return emit(j, report);
  });
}

ml_status ml_reproduce(ml_context* ctx, const char* suite, const char* criteria, const char* sidecar_dir,
                       ml_line_fn on_line, void* user, char** report) {
  return guarded(ctx, [&] {
    ML_REQUIRE(!suite || std::string(suite) == "paper", "the only suite is 'paper'");
    std::vector<int> ids;
    if (criteria && *criteria) {
      std::stringstream ss(criteria);
      std::string tok;
      while (std::getline(ss, tok, ',')) ids.push_back(std::stoi(tok));
    } else {
      for (int k = 1; k <= kCriterionCount; ++k) ids.push_back(k);
    }
    ReproduceOptions opt;
    opt.workers = ctx->workers;
    if (sidecar_dir) opt.sidecar_dir = sidecar_dir;
    json rows = json::array();
    bool all = true;
    for (int id : ids) {
      CriterionResult r = run_criterion(id, opt);
      all = all && r.pass;
      if (on_line) {
        char head[160];
        std::snprintf(head, sizeof head, "%s  %2d  %-48s %8.1f s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
        on_line(head, user);
        for (const auto& d : r.details) on_line(("      " + d).c_str(), user);
      }
      rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"seconds", r.seconds}, {"details", r.details}});
    }
    return emit(json{{"suite", "paper"}, {"pass", all}, {"criteria", rows}}, report, all);
  });
}

}  // extern "C"
