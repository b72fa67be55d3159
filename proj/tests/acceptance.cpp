#include <gmpxx.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "metriclab/reproduce.hpp"

namespace fs = std::filesystem;
using metriclab::CriterionResult;

namespace {

// Independent rebuild of the sum-variant system at eps = 0 for the K_{3,3} minus the edge {0,3}:
// variables are subsets of {0..5} as bitmasks. Rows are kept in the sidecar's order: monotonicity
// (i, then a descending over subsets of the rest), submodularity (i < j, then g descending),
// h(empty) = 0, then one equality per pair i < j.
struct Row {
  std::map<unsigned, mpq_class> a;
  bool equality;  // otherwise a.x >= rhs
  mpq_class rhs;
};

std::vector<std::vector<int>> k33_minus_edge_distances() {
  const int n = 6;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, 99));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (int u = 0; u < 3; ++u)
    for (int v = 3; v < 6; ++v)
      if (!(u == 0 && v == 3)) d[u][v] = d[v][u] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

std::vector<Row> sum_system() {
  const unsigned m = 6, full = (1u << m) - 1;
  std::vector<Row> rows;
  auto descending = [](unsigned set, auto&& f) {
    for (unsigned s = set;; s = (s - 1) & set) {
      f(s);
      if (s == 0) break;
    }
  };
  for (unsigned i = 0; i < m; ++i)
    descending(full & ~(1u << i), [&](unsigned a) { rows.push_back({{{a | (1u << i), 1}, {a, -1}}, false, 0}); });
  for (unsigned i = 0; i < m; ++i)
    for (unsigned j = i + 1; j < m; ++j) {
      unsigned bi = 1u << i, bj = 1u << j;
      descending(full & ~(bi | bj), [&](unsigned g) {
        Row r{{}, false, 0};
        r.a[g | bi] += 1;
        r.a[g | bj] += 1;
        r.a[g | bi | bj] -= 1;
        r.a[g] -= 1;
        rows.push_back(r);
      });
    }
  rows.push_back({{{0u, 1}}, true, 0});
  auto d = k33_minus_edge_distances();
  for (unsigned i = 0; i < m; ++i)
    for (unsigned j = i + 1; j < m; ++j)
      rows.push_back({{{(1u << i) | (1u << j), 2}, {1u << i, -1}, {1u << j, -1}}, true, d[i][j]});
  return rows;
}

// y >= 0 on inequalities, sum y_r a_r = 0 and sum y_r rhs_r > 0 contradicts a.x >= rhs.
std::string check_farkas(const std::string& path) {
  std::ifstream f(path);
  if (!f) return "cannot open " + path;
  std::string line;
  if (!std::getline(f, line) || line != "case 0") return "missing case header";
  if (!std::getline(f, line) || line != "infeasible") return "not an infeasibility certificate";
  std::vector<mpq_class> y;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    mpq_class q(line);
    q.canonicalize();
    y.push_back(q);
  }
  std::vector<Row> rows = sum_system();
  if (y.size() != rows.size()) return "expected " + std::to_string(rows.size()) + " multipliers, got " + std::to_string(y.size());
  std::vector<mpq_class> combo(64, 0);
  mpq_class rhs = 0;
  std::size_t support = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (y[r] == 0) continue;
    ++support;
    if (!rows[r].equality && y[r] < 0) return "negative multiplier on inequality " + std::to_string(r);
    for (const auto& [v, a] : rows[r].a) combo[v] += y[r] * a;
    rhs += y[r] * rows[r].rhs;
  }
  for (unsigned v = 0; v < 64; ++v)
    if (combo[v] != 0) return "variable " + std::to_string(v) + " does not cancel";
  if (rhs <= 0) return "combined right-hand side " + rhs.get_str() + " is not positive";
  return "ok " + std::to_string(support) + " nonzero multipliers, combined rhs " + rhs.get_str();
}

void print(const CriterionResult& r) {
  std::printf("%s criterion %d: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  for (const auto& d : r.details) std::printf("    %s\n", d.c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  metriclab::ReproduceOptions opt;
  opt.workers = 1;
  fs::path certs = fs::temp_directory_path() / "metriclab_acceptance_certs";
  fs::remove_all(certs);
  opt.sidecar_dir = certs.string();
  std::vector<int> ids;
  for (int k = 1; k < argc; ++k) ids.push_back(std::stoi(argv[k]));
  if (ids.empty())
    for (int k = 1; k <= metriclab::kCriterionCount; ++k) ids.push_back(k);

  int failed = 0;
  for (int id : ids) {
    CriterionResult r = metriclab::run_criterion(id, opt);
    if (id == 1) {
      bool found = false;
      for (const auto& e : fs::directory_iterator(certs)) {
        if (e.path().extension() != ".cert") continue;
        found = true;
        std::string verdict = check_farkas(e.path().string());
        bool ok = verdict.rfind("ok ", 0) == 0;
        r.details.push_back(std::string(ok ? "ok   " : "FAIL ") + "independent re-check of " + e.path().filename().string() +
                            ": " + (ok ? verdict.substr(3) : verdict));
        r.pass = r.pass && ok;

        std::ifstream in(e.path());
        std::stringstream text;
        text << in.rdbuf();
        std::string t = text.str();
        auto last = t.find_last_not_of('\n');
        auto start = t.find_last_of('\n', last) + 1;
        t.replace(start, last - start + 1, t.substr(start, last - start + 1) == "0" ? "1" : "0");
        fs::path bad = certs / "tampered.txt";
        std::ofstream(bad) << t;
        bool rejected = check_farkas(bad.string()).rfind("ok ", 0) != 0;
        r.details.push_back(std::string(rejected ? "ok   " : "FAIL ") + "re-check rejects a copy with its last multiplier changed");
        r.pass = r.pass && rejected;
      }
      if (!found) {
        r.details.push_back("FAIL no certificate sidecar was written");
        r.pass = false;
      }
    }
    print(r);
    failed += !r.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(ids.size()) - failed, ids.size());
  return failed == 0 ? 0 : 1;
}
