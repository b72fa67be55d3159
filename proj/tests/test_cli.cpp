#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "metriclab_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run cli(const std::string& args) {
  std::string cmd = "cd " + quote(work_dir().string()) + " && " + quote(METRICLAB_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

json load_schema(const std::string& command) {
  std::ifstream f(fs::path(METRICLAB_SCHEMAS) / (command + ".schema.json"));
  REQUIRE(f.good());
  return json::parse(f);
}

bool type_ok(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  if (t == "null") return v.is_null();
  return false;
}

// The subset of JSON Schema the published schemas use: type, enum, required, properties, items.
void validate(const json& v, const json& s, const std::string& path, std::vector<std::string>& errs) {
  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (const auto& t : s["type"]) ok = ok || type_ok(v, t);
    } else {
      ok = type_ok(v, s["type"]);
    }
    if (!ok) {
      errs.push_back(path + ": expected " + s["type"].dump());
      return;
    }
  }
  if (s.contains("enum") && std::find(s["enum"].begin(), s["enum"].end(), v) == s["enum"].end())
    errs.push_back(path + ": " + v.dump() + " not in enum");
  if (v.is_object()) {
    for (const auto& r : s.value("required", json::array()))
      if (!v.contains(r.get<std::string>())) errs.push_back(path + ": missing " + r.get<std::string>());
    if (s.contains("properties"))
      for (const auto& [k, sub] : s["properties"].items())
        if (v.contains(k)) validate(v[k], sub, path + "." + k, errs);
  }
  if (v.is_array() && s.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i) validate(v[i], s["items"], path + "[" + std::to_string(i) + "]", errs);
}

json checked(const std::string& command, const std::string& args, int expect_code) {
  Run r = cli(command + " " + args);
  INFO(command << " " << args);
  REQUIRE(r.code == expect_code);
  json doc = json::parse(r.out);
  std::vector<std::string> errs;
  validate(doc, load_schema(command), "$", errs);
  for (const auto& e : errs) FAIL_CHECK(e);
  CHECK(doc["manifest"]["command"] == command);
  return doc;
}

}  // namespace

TEST_CASE("lp-embed on K33 minus an edge prints a certificate path and exits 0") {
  Run r = cli("lp-embed --graph k33-minus-edge --variant sum --eps 0 --out lp.json");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("verdict: \"infeasible\"") != std::string::npos);
  auto at = r.out.find("certificate: ");
  REQUIRE(at != std::string::npos);
  std::string path = r.out.substr(at + 13);
  path = path.substr(0, path.find('\n'));
  CHECK(fs::exists(work_dir() / path));
  std::ifstream f(work_dir() / "lp.json");
  json doc = json::parse(f);
  CHECK(doc["report"]["vars"] == 64);
  CHECK(doc["report"]["cone_rows"] == 432);
  CHECK(doc["manifest"]["outputs"].size() == 2);
}

TEST_CASE("cnd reads a metric file") {
  std::ofstream(work_dir() / "d01-3.json") << R"({"d": [["0","1","1"],["1","0","1"],["1","1","0"]]})";
  json doc = checked("cnd", "--metric d01-3.json", 0);
  CHECK(doc["report"]["verdict"] == "CND");
  CHECK(doc["manifest"]["parameters"]["metric"].get<std::string>().front() == '{');
  fs::remove(work_dir() / "d01-3.json");
  CHECK(checked("cnd", "--metric d01-3.json", 0)["report"]["verdict"] == "CND");
}

TEST_CASE("exit codes") {
  CHECK(cli("cnd --metric d01-3 --bogus 1").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("--help").code == 0);
  CHECK(cli("validate --metric nowhere").code == 2);
  CHECK(cli("validate").code == 2);
  CHECK(cli("lp-embed --graph k33 --eps -1/2 --cert-dir ''").code == 2);
  CHECK(cli("kmn --m x").code == 2);
  CHECK(cli("validate --metric '{\"d\": [[\"0\",\"2\"],[\"1\",\"0\"]]}'").code == 1);
  CHECK(cli("euclidean --metric k33").code == 1);
  CHECK(cli("euclidean --metric k33 --alpha 1/4").code == 0);
  CHECK(cli("cnd --metric k32 --exponent 2").code == 1);
  CHECK(cli("realize --metric k33").code == 1);
  CHECK(cli("embed-cube --graph k33").code == 2);
}

TEST_CASE("every subcommand matches its schema") {
  checked("validate", "--metric k33", 0);
  checked("validate", "--metric '{\"d\": [[\"0\",\"1\",\"5\"],[\"1\",\"0\",\"1\"],[\"5\",\"1\",\"0\"]]}'", 1);
  checked("graph-metric", "--graph ring-5", 0);
  checked("cnd", "--metric path-4 --exponent 3", 1);
  checked("euclidean", "--metric cube-3 --alpha 1/2", 0);
  checked("kmn", "--m 3 --n 4 --alpha 1/5", 0);
  checked("kmn", "--m 3 --n 4 --alpha 1/4", 1);
  checked("realize", "--metric path-4", 0);
  checked("embed-cube", "--graph '{\"n\": 5, \"edges\": [[0,1],[1,2],[1,3],[3,4]]}'", 0);
  checked("embed-4pt", "--metric paw", 0);
  checked("embed-scale", "--kind box --s 64", 0);
  checked("embed-scale", "--kind cube --dim 3 --s 32 --points '[[0,0,0],[1,1,0]]'", 0);
  checked("verify-scale", "--kind interval --scale-list 4096", 0);
  checked("entropy", "--dist cut:0101", 0);
  checked("lp-embed", "--graph path-3 --variant max --cert-dir ''", 0);
  checked("kraft", "--count 8 --bits 512", 0);
  checked("packing", "--metric hamming4", 0);
  json rep = checked("reproduce", "--criteria 2", 0);
  CHECK(rep["report"]["criteria"][0]["pass"] == true);
}

TEST_CASE("verify-scale writes the ratio table") {
  json doc = checked("verify-scale", "--kind cube --dim 4 --scale-list 1024,2048 --csv ratios.csv", 0);
  std::ifstream f(work_dir() / "ratios.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "pair,s,d_target,d_hat,ratio,excluded");
  std::size_t lines = 0;
  for (std::string l; std::getline(f, l);) ++lines;
  CHECK(lines == doc["report"]["rows"].size());
}

TEST_CASE("manifest replay is byte-identical") {
  Run a = cli("verify-scale --kind cube --dim 5 --scale-list 1024,2048 --seed 9 --out first.json");
  REQUIRE(a.code == 0);
  Run b = cli("--manifest first.json --out second.json");
  REQUIRE(b.code == 0);
  std::ifstream f1(work_dir() / "first.json"), f2(work_dir() / "second.json");
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  json j1 = json::parse(s1.str()), j2 = json::parse(s2.str());
  CHECK(j1["report"].dump() == j2["report"].dump());
  CHECK(j1["manifest"]["argv"] == j2["manifest"]["argv"]);

  Run c = cli("--manifest first.json --workers 3");
  REQUIRE(c.code == 0);
  CHECK(json::parse(c.out)["report"].dump() == j1["report"].dump());
  CHECK(cli("--manifest missing.json").code == 2);
}

TEST_CASE("seed changes embedded strings") {
  json a = checked("embed-scale", "--kind interval --s 128 --seed 1", 0);
  json b = checked("embed-scale", "--kind interval --s 128 --seed 2", 0);
  json c = checked("embed-scale", "--kind interval --s 128 --seed 1", 0);
  CHECK(a["report"] == c["report"]);
  CHECK(a["report"]["strings"] != b["report"]["strings"]);
}
