#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "metriclab.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

struct Failure {
  int code;
  std::string message;
};

// Every option is a string so the manifest can replay it verbatim.
struct Registry {
  std::map<CLI::App*, std::vector<std::pair<std::string, std::string*>>> opts;
  std::vector<std::unique_ptr<std::string>> store;

  std::string& add(CLI::App* app, const std::string& flag, const std::string& def, const std::string& help) {
    store.push_back(std::make_unique<std::string>(def));
    std::string* v = store.back().get();
    app->add_option(flag, *v, help)->capture_default_str()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    opts[app].emplace_back(flag, v);
    return *v;
  }
};

struct Globals {
  std::string seed = "1", codec = "lz77", workers = "1", out;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Failure{kExitInput, "cannot read " + path};
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Path, built-in name, or inline JSON. Files are inlined so the manifest does not depend on them.
std::string resolve_input(const std::string& value) {
  if (value.empty()) throw Failure{kExitInput, "missing input"};
  if (value.front() != '{' && value.front() != '[' && std::filesystem::is_regular_file(value)) return read_file(value);
  if (value.size() > 5 && value.compare(value.size() - 5, 5, ".json") == 0) return value.substr(0, value.size() - 5);
  return value;
}

class Session {
 public:
  explicit Session(const Globals& g) : ctx_(ml_context_new()) {
    if (!ctx_) throw Failure{kExitInternal, "out of memory"};
    ml_set_seed(ctx_, std::stoull(g.seed));
    ml_set_workers(ctx_, static_cast<unsigned>(std::stoul(g.workers)));
    check(ml_set_codec(ctx_, g.codec.c_str()));
  }
  ~Session() {
    for (auto* m : metrics_) ml_metric_free(m);
    ml_context_free(ctx_);
  }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ml_context* ctx() const { return ctx_; }

  ml_metric* metric(const std::string& spec) {
    ml_metric* m = nullptr;
    check(ml_metric_load(ctx_, spec.c_str(), &m));
    metrics_.push_back(m);
    return m;
  }

  // Turns a status into a verdict flag, or throws on failure.
  bool check(ml_status s) const {
    if (s == ML_OK) return true;
    if (s == ML_NEGATIVE) return false;
    throw Failure{s == ML_INPUT_ERROR ? kExitInput : kExitInternal, ml_last_error(ctx_)};
  }

  // text is read after s has been evaluated, so callers pass &out.
  json take(ml_status s, char** text, bool* positive = nullptr) const {
    bool ok = check(s);
    if (positive) *positive = ok;
    json j = json::parse(*text);
    ml_free_string(*text);
    return j;
  }

 private:
  ml_context* ctx_;
  std::vector<ml_metric*> metrics_;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

json json_arg(const std::string& value, const char* what) {
  try {
    return json::parse(resolve_input(value));
  } catch (const json::exception& e) {
    throw Failure{kExitInput, std::string("bad ") + what + ": " + e.what()};
  }
}

json default_points(const std::string& kind, std::size_t dim, const json& bounds) {
  json pts = json::array();
  if (kind == "cube") {
    for (std::size_t k = 0; k <= dim; ++k) {
      json p = json::array();
      for (std::size_t i = 0; i < dim; ++i) p.push_back(i < k ? 1 : 0);
      pts.push_back(p);
    }
  } else if (kind == "interval" || kind == "sequence") {
    for (int k = 0; k <= 4; ++k) pts.push_back(json::array({std::to_string(k) + "/4"}));
  } else if (kind == "simplex") {
    for (std::size_t k = 0; k < dim; ++k) {
      json p = json::array();
      for (std::size_t i = 0; i < dim; ++i) p.push_back(i == k ? 1 : 0);
      pts.push_back(p);
    }
  } else if (kind == "box") {
    std::size_t d = bounds.size();
    for (std::size_t c = 0; c < (std::size_t{1} << d); ++c) {
      json p = json::array();
      for (std::size_t i = 0; i < d; ++i) p.push_back(bounds[i][(c >> i) & 1]);
      pts.push_back(p);
    }
  }
  return pts;
}

json scale_params(const std::map<std::string, std::string>& a) {
  json p = a.at("--params").empty() ? json::object() : json_arg(a.at("--params"), "params");
  if (!a.at("--kind").empty()) p["kind"] = a.at("--kind");
  if (!p.contains("kind")) throw Failure{kExitInput, "--kind is required"};
  std::string kind = p["kind"];
  if (!a.at("--dim").empty()) p["m"] = std::stoul(a.at("--dim"));
  if (!a.at("--s").empty()) p["s"] = std::stoul(a.at("--s"));
  if (!a.at("--bounds").empty()) p["bounds"] = json_arg(a.at("--bounds"), "bounds");
  if (kind == "box" && !p.contains("bounds")) p["bounds"] = json::array({json::array({"0", "1"}), json::array({"0", "1"})});
  if ((kind == "cube" || kind == "simplex") && !p.contains("m")) p["m"] = 4;
  if (!a.at("--points").empty()) p["points"] = json_arg(a.at("--points"), "points");
  if (!p.contains("points")) p["points"] = default_points(kind, p.value("m", std::size_t{0}), p.value("bounds", json::array()));
  return p;
}

void write_csv(const std::string& path, const json& rows) {
  std::ofstream f(path);
  if (!f) throw Failure{kExitInput, "cannot write " + path};
  f << "pair,s,d_target,d_hat,ratio,excluded\n";
  for (const auto& r : rows) {
    f << r["i"].get<std::size_t>() << "-" << r["j"].get<std::size_t>() << "," << r["s"].get<std::size_t>() << ","
      << r["target"].get<std::string>() << ",";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", r["d_hat"].get<double>(), r["ratio"].get<double>());
    f << buf << "," << (r["excluded"].get<bool>() ? 1 : 0) << "\n";
  }
}

using Args = std::map<std::string, std::string>;
using Runner = std::function<json(Session&, const Args&, bool&)>;

struct Command {
  const char* name;
  const char* help;
  bool is_test;  // negative verdicts map to exit 1
  std::vector<std::tuple<const char*, const char*, const char*>> options;  // flag, default, help
  Runner run;
};

std::vector<Command> commands() {
  const auto metric_opt = std::make_tuple("--metric", "", "metric file, built-in name or inline JSON");
  const auto graph_opt = std::make_tuple("--graph", "", "graph file, built-in name or inline JSON");
  auto metric_of = [](Session& s, const Args& a) {
    const std::string& v = !a.at("--metric").empty() ? a.at("--metric") : a.at("--graph");
    if (v.empty()) throw Failure{kExitInput, "--metric or --graph is required"};
    return s.metric(resolve_input(v));
  };
  const std::vector<std::tuple<const char*, const char*, const char*>> scale_opts = {
      {"--params", "", "embedding parameters as JSON"},
      {"--kind", "", "cube, interval, sequence, box, simplex (verify-scale also takes xor)"},
      {"--dim", "", "dimension for cube and simplex"},
      {"--s", "", "scale"},
      {"--bounds", "", "box bounds as JSON [[lo, hi], ...]"},
      {"--points", "", "points as JSON"}};

  std::vector<Command> c;
  c.push_back({"validate", "check the metric axioms", true, {metric_opt, graph_opt},
               [=](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 return s.take(ml_validate(s.ctx(), metric_of(s, a), &out), &out, &pos);
               }});
  c.push_back({"graph-metric", "shortest-path metric of a graph", false, {graph_opt, metric_opt},
               [=](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 return s.take(ml_metric_to_json(s.ctx(), metric_of(s, a), &out), &out, &pos);
               }});
  c.push_back({"cnd", "conditional negative definiteness of d^exponent", true,
               {metric_opt, graph_opt, {"--exponent", "1", "entrywise exponent p/q"}},
               [=](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 return s.take(ml_cnd(s.ctx(), metric_of(s, a), a.at("--exponent").c_str(), &out), &out, &pos);
               }});
  c.push_back({"euclidean", "Euclidean test of d^alpha", true,
               {metric_opt, graph_opt, {"--alpha", "1", "exponent p/q"}},
               [=](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 return s.take(ml_euclidean(s.ctx(), metric_of(s, a), a.at("--alpha").c_str(), &out), &out, &pos);
               }});
  c.push_back({"kmn", "Euclidean test of d_{K_{m,n}}^alpha", true,
               {{"--m", "3", "left part size"}, {"--n", "3", "right part size"}, {"--alpha", "1/2", "exponent p/q"}},
               [](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 json j = s.take(ml_kmn(s.ctx(), std::stoul(a.at("--m")), std::stoul(a.at("--n")), a.at("--alpha").c_str(), &out),
                                 &out);
                 pos = j["euclidean"].get<bool>();
                 return j;
               }});
  c.push_back({"realize", "coordinates of a Euclidean metric", true, {metric_opt, graph_opt},
               [=](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 return s.take(ml_realize(s.ctx(), metric_of(s, a), &out), &out, &pos);
               }});
  c.push_back({"embed-cube", "isometric Hamming-cube embedding of a graph", true, {graph_opt},
               [](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 std::string g = resolve_input(a.at("--graph"));
                 return s.take(ml_embed_cube(s.ctx(), g.c_str(), &out), &out, &pos);
               }});
  c.push_back({"embed-4pt", "l1 embedding of a four-point metric", true, {metric_opt, graph_opt},
               [=](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 return s.take(ml_embed_4pt(s.ctx(), metric_of(s, a), &out), &out, &pos);
               }});
  c.push_back({"embed-scale", "emit bit strings of a seeded scale embedding", false, scale_opts,
               [](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 std::string p = scale_params(a).dump();
                 return s.take(ml_embed_scale(s.ctx(), p.c_str(), &out), &out, &pos);
               }});
  auto verify_opts = scale_opts;
  verify_opts.push_back({"--scale-list", "1024,4096,16384", "comma-separated scales"});
  verify_opts.push_back({"--band", "0.7,1.3", "ratio band lo,hi"});
  verify_opts.push_back({"--csv", "", "write the ratio table here"});
  c.push_back({"verify-scale", "compressor-measured ratio check of a scale embedding", true, verify_opts,
               [](Session& s, const Args& a, bool& pos) {
                 json p = a.at("--kind") == "xor" ? json{{"kind", "xor"}} : scale_params(a);
                 json scales = json::array();
                 for (const auto& t : split(a.at("--scale-list"), ',')) scales.push_back(std::stoul(t));
                 p["scales"] = scales;
                 auto band = split(a.at("--band"), ',');
                 if (band.size() != 2) throw Failure{kExitInput, "--band takes lo,hi"};
                 p["band"] = {std::stod(band[0]), std::stod(band[1])};
                 char* out = nullptr;
                 std::string text = p.dump();
                 json j = s.take(ml_verify_scale(s.ctx(), text.c_str(), &out), &out, &pos);
                 if (!a.at("--csv").empty()) {
                   write_csv(a.at("--csv"), j["rows"]);
                   j["csv_path"] = a.at("--csv");
                 }
                 return j;
               }});
  c.push_back({"entropy", "joint entropy vector and information distances", false,
               {{"--dist", "xor", "xor, cut:<bits>, or a distribution file / JSON"}},
               [](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 std::string d = resolve_input(a.at("--dist"));
                 return s.take(ml_entropy(s.ctx(), d.c_str(), &out), &out, &pos);
               }});
  c.push_back({"lp-embed", "entropic LP feasibility with certificates", false,
               {graph_opt, metric_opt, {"--variant", "sum", "sum or max"}, {"--eps", "0", "slack p/q"},
                {"--mode", "metric_band", "metric_band, both_relaxed or normalized"},
                {"--cert-dir", "certificates", "directory for certificate sidecars"}},
               [=](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 const std::string& dir = a.at("--cert-dir");
                 return s.take(ml_lp_embed(s.ctx(), metric_of(s, a), a.at("--variant").c_str(), a.at("--eps").c_str(),
                                           a.at("--mode").c_str(), dir.empty() ? nullptr : dir.c_str(), &out),
                               &out, &pos);
               }});
  c.push_back({"kraft", "Kraft sum and ball count over seeded strings", false,
               {{"--count", "64", "number of strings"}, {"--bits", "4096", "bits per string"}, {"--radius", "0.5", "ball radius"}},
               [](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 return s.take(ml_kraft(s.ctx(), std::stoul(a.at("--count")), std::stoul(a.at("--bits")),
                                        std::stod(a.at("--radius")), &out),
                               &out, &pos);
               }});
  c.push_back({"packing", "packing obstruction to scale embedding", false,
               {metric_opt, graph_opt, {"--eps", "1/4", "packing radius p/q"}, {"--r", "1", "ball radius p/q"},
                {"--c", "1", "log factor"}, {"--b", "0", "additive constant"}, {"--s-max", "256", "largest scale"}},
               [=](Session& s, const Args& a, bool& pos) {
                 char* out = nullptr;
                 return s.take(ml_packing(s.ctx(), metric_of(s, a), a.at("--eps").c_str(), a.at("--r").c_str(),
                                          std::stod(a.at("--c")), std::stod(a.at("--b")), std::stoul(a.at("--s-max")), &out),
                               &out, &pos);
               }});
  c.push_back({"reproduce", "run the acceptance suite and print a PASS/FAIL table", true,
               {{"--suite", "paper", "suite name"}, {"--criteria", "", "comma list, all when empty"},
                {"--cert-dir", "", "directory for certificate sidecars"}},
               [](Session& s, const Args& a, bool& pos) {
                 auto sink = [](const char* line, void*) {
                   std::fprintf(stderr, "%s\n", line);
                   std::fflush(stderr);
                 };
                 char* out = nullptr;
                 const std::string& dir = a.at("--cert-dir");
                 json j = s.take(ml_reproduce(s.ctx(), a.at("--suite").c_str(), a.at("--criteria").c_str(),
                                              dir.empty() ? nullptr : dir.c_str(), sink, nullptr, &out),
                                 &out, &pos);
                 for (auto& r : j["criteria"]) r.erase("seconds");
                 return j;
               }});
  return c;
}

int usage_code(const CLI::ParseError& e) { return e.get_exit_code() == 0 ? kExitOk : kExitInput; }

std::vector<std::string> manifest_argv(const std::string& path) {
  json m = json::parse(read_file(path));
  if (m.contains("manifest")) m = m["manifest"];
  if (!m.contains("argv") || !m["argv"].is_array()) throw Failure{kExitInput, "manifest has no argv"};
  return m["argv"].get<std::vector<std::string>>();
}

int run(std::vector<std::string> argv_in) {
  if (argv_in.size() >= 2 && argv_in[0] == "--manifest") {
    std::vector<std::string> rest(argv_in.begin() + 2, argv_in.end());
    argv_in = manifest_argv(argv_in[1]);
    argv_in.insert(argv_in.end(), rest.begin(), rest.end());
  }

  CLI::App app{"metriclab: metric embeddings, entropic LPs and compressor-measured distances"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ml_version());
  Globals g;
  Registry reg;
  auto add_globals = [&](CLI::App* a) {
    a->add_option("--seed", g.seed, "base seed")->capture_default_str()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    a->add_option("--codec", g.codec, "lz77, lz77x or external")->capture_default_str()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    a->add_option("--workers", g.workers, "worker threads")->capture_default_str()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    a->add_option("--out", g.out, "write the JSON report here")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };

  std::vector<Command> cmds = commands();
  std::map<CLI::App*, const Command*> by_app;
  for (const auto& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_globals(sub);
    for (const auto& [flag, def, help] : c.options) reg.add(sub, flag, def, help);
    by_app[sub] = &c;
  }

  std::vector<std::string> rev(argv_in.rbegin(), argv_in.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage_code(e);
  }

  CLI::App* sub = app.get_subcommands().front();
  const Command& cmd = *by_app.at(sub);
  Args args;
  json argv = json::array({cmd.name});
  json params = json::object();
  for (auto& [flag, value] : reg.opts[sub]) {
    std::string v = *value;
    if ((flag == std::string("--metric") || flag == std::string("--graph") || flag == std::string("--dist") ||
         flag == std::string("--params") || flag == std::string("--points") || flag == std::string("--bounds")) &&
        !v.empty())
      v = resolve_input(v);
    args[flag] = v;
    params[flag.substr(2)] = v;
    argv.push_back(flag);
    argv.push_back(v);
  }
  for (auto [flag, v] : {std::pair{"--seed", g.seed}, {"--codec", g.codec}, {"--workers", g.workers}}) {
    argv.push_back(flag);
    argv.push_back(v);
  }

  json manifest = {{"command", cmd.name}, {"version", ml_version()}, {"seed", g.seed}, {"codec", g.codec},
                   {"workers", g.workers}, {"parameters", params}, {"argv", argv}};
  try {
    Session s(g);
    bool positive = true;
    json report = cmd.run(s, args, positive);
    json outputs = json::array();
    if (!g.out.empty()) outputs.push_back(g.out);
    if (report.is_object()) {
      if (report.contains("certificate_path")) outputs.push_back(report["certificate_path"]);
      if (report.contains("csv_path")) outputs.push_back(report["csv_path"]);
    }
    manifest["outputs"] = outputs;
    json doc = {{"manifest", manifest}, {"report", report}};
    std::string text = doc.dump(2) + "\n";
    if (g.out.empty()) {
      std::fwrite(text.data(), 1, text.size(), stdout);
    } else {
      std::ofstream f(g.out, std::ios::binary);
      f << text;
      if (!f) throw Failure{kExitInput, "cannot write " + g.out};
      if (report.is_object() && report.contains("verdict")) std::printf("verdict: %s\n", report["verdict"].dump().c_str());
      if (report.is_object() && report.contains("certificate_path"))
        std::printf("certificate: %s\n", report["certificate_path"].get<std::string>().c_str());
    }
    return positive || !cmd.is_test ? kExitOk : kExitNegative;
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: bad numeric argument (%s)\n", e.what());
    return kExitInput;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "error: numeric argument out of range (%s)\n", e.what());
    return kExitInput;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInternal;
  }
}
