#include "metriclab/entropic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "metriclab/prng.hpp"

namespace metriclab {

// ---- distributions and entropies ---------------------------------------------------------------

JointDistribution::JointDistribution(std::vector<std::size_t> alph, std::vector<Rational> tab)
    : m(alph.size()), alphabets(std::move(alph)), table(std::move(tab)) {
  std::size_t states = 1;
  for (std::size_t a : alphabets) {
    if (a == 0) throw InputError("alphabet sizes must be positive");
    if (states > kMaxStates / a) throw InputError("joint state space exceeds 2^20 states");
    states *= a;
  }
  if (table.size() != states)
    throw InputError("probability table has " + std::to_string(table.size()) + " entries, expected " +
                     std::to_string(states));
  Rational total = 0;
  for (auto& p : table) {
    p.canonicalize();
    if (p < 0) throw InputError("negative probability");
    total += p;
  }
  if (total != 1) throw InputError("probabilities sum to " + to_string(total) + ", not 1");
}

std::size_t JointDistribution::symbol(std::size_t state, std::size_t var) const {
  for (std::size_t k = 0; k < var; ++k) state /= alphabets[k];
  return state % alphabets[var];
}

std::size_t JointDistribution::index(const std::vector<std::size_t>& symbols) const {
  std::size_t idx = 0, stride = 1;
  for (std::size_t k = 0; k < m; ++k) {
    if (symbols[k] >= alphabets[k]) throw InputError("symbol out of range");
    idx += symbols[k] * stride;
    stride *= alphabets[k];
  }
  return idx;
}

JointDistribution uniform_over(std::vector<std::size_t> alphabets,
                               const std::vector<std::vector<std::size_t>>& outcomes) {
  if (outcomes.empty()) throw InputError("uniform law over no outcomes");
  std::size_t states = 1;
  for (std::size_t a : alphabets) {
    if (a == 0 || states > JointDistribution::kMaxStates / a) throw InputError("bad alphabet sizes");
    states *= a;
  }
  std::vector<Rational> table(states, Rational(0));
  JointDistribution shape;
  shape.m = alphabets.size();
  shape.alphabets = alphabets;
  Rational w = make_rational(1, static_cast<long>(outcomes.size()));
  for (const auto& o : outcomes) table[shape.index(o)] += w;
  return JointDistribution(std::move(alphabets), std::move(table));
}

bool EntropicVector::all_exact() const {
  return std::all_of(h.begin(), h.end(), [](const CertifiedReal& x) { return x.is_exact(); });
}

RationalVector EntropicVector::to_exact() const {
  RationalVector out;
  for (const auto& x : h) {
    if (!x.is_exact()) throw InconsistencyError("entropic vector has irrational entries");
    out.push_back(*x.exact);
  }
  return out;
}

namespace {

bool power_of_two(const mpz_class& z) { return z > 0 && mpz_popcount(z.get_mpz_t()) == 1; }

// lb of a positive rational, exact when it is a power of 2.
CertifiedReal certified_log2(const Rational& q, unsigned prec) {
  if (power_of_two(q.get_num()) && power_of_two(q.get_den())) {
    long e = static_cast<long>(mpz_sizeinbase(q.get_num_mpz_t(), 2)) -
             static_cast<long>(mpz_sizeinbase(q.get_den_mpz_t(), 2));
    return CertifiedReal(Rational(e), prec);
  }
  return CertifiedReal(Interval::log2(q, prec));
}

CertifiedReal entropy_term(const Rational& p, unsigned prec) {
  CertifiedReal l = certified_log2(p, prec);
  return CertifiedReal(Rational(-p), prec) * l;
}

}  // namespace

EntropicVector joint_entropy_vector(const JointDistribution& j, unsigned prec) {
  if (j.m > 20) throw InputError("too many variables for a full entropic vector");
  std::vector<std::pair<std::vector<std::size_t>, Rational>> support;
  for (std::size_t st = 0; st < j.states(); ++st) {
    if (j.table[st] == 0) continue;
    std::vector<std::size_t> sym(j.m);
    for (std::size_t k = 0; k < j.m; ++k) sym[k] = j.symbol(st, k);
    support.emplace_back(std::move(sym), j.table[st]);
  }
  EntropicVector out;
  out.m = j.m;
  out.h.assign(std::size_t{1} << j.m, CertifiedReal(Rational(0), prec));
  for (std::size_t mask = 1; mask < out.h.size(); ++mask) {
    std::unordered_map<std::uint64_t, Rational> marginal;
    for (const auto& [sym, p] : support) {
      std::uint64_t key = 0;
      for (std::size_t k = 0; k < j.m; ++k)
        if ((mask >> k) & 1) key = key * j.alphabets[k] + sym[k];
      marginal[key] += p;
    }
    std::vector<std::pair<std::uint64_t, Rational>> ordered(marginal.begin(), marginal.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    CertifiedReal acc(Rational(0), prec);
    for (auto& [k, p] : ordered) {
      p.canonicalize();
      acc = acc + entropy_term(p, prec);
    }
    out.h[mask] = acc;
  }
  return out;
}

CertifiedReal conditional_entropy(const EntropicVector& h, std::size_t i, std::size_t j) {
  if (i >= h.m || j >= h.m) throw InputError("variable index out of range");
  if (i == j) return CertifiedReal(Rational(0));
  std::size_t bi = std::size_t{1} << i, bj = std::size_t{1} << j;
  return h.h[bi | bj] - h.h[bj];
}

CertifiedReal info_distance(const EntropicVector& h, std::size_t i, std::size_t j, InfoVariant v) {
  if (i == j) return CertifiedReal(Rational(0));
  CertifiedReal a = conditional_entropy(h, i, j), b = conditional_entropy(h, j, i);
  if (v == InfoVariant::Max) return certified_max(a, b);
  return (a + b) * CertifiedReal(make_rational(1, 2));
}

CertifiedReal info_distance(const JointDistribution& j, std::size_t a, std::size_t b, InfoVariant v) {
  return info_distance(joint_entropy_vector(j), a, b, v);
}

FiniteMetric info_distance_matrix(const EntropicVector& h, InfoVariant v) {
  RationalMatrix d = zero_matrix(h.m);
  for (std::size_t i = 0; i < h.m; ++i)
    for (std::size_t j = 0; j < h.m; ++j) {
      CertifiedReal x = info_distance(h, i, j, v);
      if (!x.is_exact()) throw InconsistencyError("info distance is not rational");
      d[i][j] = *x.exact;
    }
  return FiniteMetric(d);
}

XorWitness k33_xor_witness() {
  std::vector<std::vector<std::size_t>> outcomes;
  for (unsigned w = 0; w < 16; ++w) {
    std::size_t T = (w >> 3) & 1, U = (w >> 2) & 1, V = (w >> 1) & 1, W = w & 1;
    auto sym = [](std::size_t a, std::size_t b) { return 2 * a + b; };
    outcomes.push_back({sym(T, U), sym(V, W), sym(T ^ V, U ^ W), sym(T, V), sym(U, W), sym(T ^ U, V ^ W)});
  }
  XorWitness x;
  x.dist = uniform_over(std::vector<std::size_t>(6, 4), outcomes);
  x.labels = {"X1=TU", "X2=VW", "X3=(T^V)(U^W)", "X4=TV", "X5=UW", "X6=(T^U)(V^W)"};
  return x;
}

JointDistribution cut_metric_witness(const std::vector<int>& side) {
  bool has0 = false, has1 = false;
  for (int s : side) {
    if (s != 0 && s != 1) throw InputError("cut sides must be 0 or 1");
    (s ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw InputError("a cut needs two nonempty parts");
  std::vector<std::vector<std::size_t>> outcomes;
  for (std::size_t u = 0; u < 2; ++u)
    for (std::size_t v = 0; v < 2; ++v) {
      std::vector<std::size_t> o;
      for (int s : side) o.push_back(s ? v : u);
      outcomes.push_back(o);
    }
  return uniform_over(std::vector<std::size_t>(side.size(), 2), outcomes);
}

// ---- constraint systems ------------------------------------------------------------------------

std::size_t monotonicity_count(std::size_t m) { return m << (m - 1); }
std::size_t submodularity_count(std::size_t m) { return m < 2 ? 0 : (m * (m - 1) / 2) << (m - 2); }

ConstraintSystem shannon_cone_constraints(std::size_t m) {
  if (m < 2 || m > 10) throw InputError("Shannon cone supported for 2 <= m <= 10");
  const std::size_t full = (std::size_t{1} << m) - 1;
  ConstraintSystem s(std::size_t{1} << m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bi = std::size_t{1} << i;
    const std::size_t rest = full & ~bi;
    for (std::size_t a = rest;; a = (a - 1) & rest) {
      s.add({{a | bi, Rational(1)}, {a, Rational(-1)}}, Relation::Ge, Rational(0),
            "mono " + std::to_string(i) + "|" + std::to_string(a));
      if (a == 0) break;
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const std::size_t bi = std::size_t{1} << i, bj = std::size_t{1} << j;
      const std::size_t rest = full & ~(bi | bj);
      for (std::size_t g = rest;; g = (g - 1) & rest) {
        s.add({{g | bi, Rational(1)}, {g | bj, Rational(1)}, {g | bi | bj, Rational(-1)}, {g, Rational(-1)}},
              Relation::Ge, Rational(0), "sub " + std::to_string(i) + "," + std::to_string(j) + "|" + std::to_string(g));
        if (g == 0) break;
      }
    }
  s.add({{0, Rational(1)}}, Relation::Eq, Rational(0), "empty");
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> metric_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> p;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) p.emplace_back(i, j);
  return p;
}

namespace {

using Coeffs = std::vector<std::pair<std::size_t, Rational>>;

Coeffs cond(std::size_t i, std::size_t j) {
  std::size_t bi = std::size_t{1} << i, bj = std::size_t{1} << j;
  return {{bi | bj, Rational(1)}, {bj, Rational(-1)}};
}

void add_band(ConstraintSystem& s, Coeffs c, const Rational& d, const Rational& eps, const std::string& tag) {
  if (eps == 0) {
    s.add(std::move(c), Relation::Eq, d, tag);
    return;
  }
  s.add(c, Relation::Ge, d - eps, tag + " lo");
  s.add(std::move(c), Relation::Le, d + eps, tag + " hi");
}

ConstraintSystem metric_rows(const FiniteMetric& m, MetricVariant v, std::uint64_t case_id, const Rational& eps) {
  ConstraintSystem s(std::size_t{1} << m.n);
  auto pairs = metric_pairs(m.n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto [i, j] = pairs[k];
    const Rational& d = m(i, j);
    std::string tag = "d" + std::to_string(i) + std::to_string(j);
    if (v == MetricVariant::Sum) {
      std::size_t bi = std::size_t{1} << i, bj = std::size_t{1} << j;
      add_band(s, {{bi | bj, Rational(2)}, {bi, Rational(-1)}, {bj, Rational(-1)}}, d, eps, tag);
      continue;
    }
    bool flip = (case_id >> k) & 1;
    std::size_t a = flip ? j : i, b = flip ? i : j;
    add_band(s, cond(a, b), d, eps, tag + " H(" + std::to_string(a) + "|" + std::to_string(b) + ")=");
    s.add(cond(b, a), Relation::Le, d + eps, tag + " H(" + std::to_string(b) + "|" + std::to_string(a) + ")<=");
  }
  return s;
}

}  // namespace

ConstraintSystem metric_constraints(const FiniteMetric& m, MetricVariant v, std::uint64_t case_id) {
  if (m.n < 2 || m.n > 10) throw InputError("metric constraints need 2 <= n <= 10");
  return metric_rows(m, v, case_id, Rational(0));
}

const char* eps_mode_name(EpsMode e) {
  switch (e) {
    case EpsMode::MetricBand: return "metric_band";
    case EpsMode::BothRelaxed: return "both_relaxed";
    case EpsMode::Normalized: return "normalized";
  }
  return "?";
}

namespace {

FiniteMetric normalized(const FiniteMetric& m) {
  Rational total = 0;
  for (auto [i, j] : metric_pairs(m.n)) total += m(i, j);
  if (total == 0) throw InputError("cannot normalize the zero metric");
  RationalMatrix d = m.d;
  for (auto& row : d)
    for (auto& x : row) {
      x /= total;
      x.canonicalize();
    }
  return FiniteMetric(d);
}

ConstraintSystem relaxed_cone(std::size_t n, const Rational& eps, EpsMode mode) {
  ConstraintSystem cone = shannon_cone_constraints(n);
  if (mode != EpsMode::MetricBand && eps != 0)
    for (auto& row : cone.rows)
      if (row.rel == Relation::Ge) row.rhs = -eps;
  return cone;
}

}  // namespace

ConstraintSystem embeddability_system(const FiniteMetric& m, MetricVariant v, const Rational& eps, EpsMode mode,
                                      std::uint64_t case_id) {
  if (eps < 0) throw InputError("eps must be nonnegative");
  if (m.n < 2 || m.n > 8) throw InputError("embeddability LP supports 2 <= n <= 8");
  ConstraintSystem s = relaxed_cone(m.n, eps, mode);
  s.append(metric_rows(mode == EpsMode::Normalized ? normalized(m) : m, v, case_id, eps));
  return s;
}

std::string serialize_artifact(const FeasibilityResult& r) {
  std::string out = r.verdict == Verdict::Feasible ? "feasible\n" : "infeasible\n";
  for (const auto& x : r.verdict == Verdict::Feasible ? r.point : r.multipliers) out += to_string(x) + "\n";
  return out;
}

FeasibilityResult parse_artifact(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty artifact");
  FeasibilityResult r;
  if (line == "feasible")
    r.verdict = Verdict::Feasible;
  else if (line == "infeasible")
    r.verdict = Verdict::Infeasible;
  else
    throw InputError("artifact has an unknown verdict line '" + line + "'");
  auto& dst = r.verdict == Verdict::Feasible ? r.point : r.multipliers;
  while (std::getline(in, line))
    if (!line.empty()) dst.push_back(parse_rational(line));
  return r;
}

namespace {

std::string digest_of(const FeasibilityResult& r) {
  std::string s = serialize_artifact(r);
  return sha256_hex(Bytes(s.begin(), s.end()));
}

struct CaseWork {
  CaseOutcome outcome;
  FeasibilityResult artifact;
};

CaseWork solve_case(const ConstraintSystem& s, std::uint64_t id) {
  CaseWork w;
  w.outcome.case_id = id;
  FloatLpResult f = feasible_float(s);
  Confirmation c = confirm_exactly(s, f);
  if (!verify_certificate(s, c.result).ok) throw InconsistencyError("case " + std::to_string(id) + ": artifact does not verify");
  w.outcome.verdict = c.result.verdict;
  w.outcome.route = c.route;
  w.outcome.float_pivots = f.pivots;
  w.outcome.float_disagreed = f.verdict != c.result.verdict;
  w.outcome.digest = digest_of(c.result);
  w.artifact = std::move(c.result);
  return w;
}

}  // namespace

EmbeddabilityResult embeddability_lp(const FiniteMetric& m, MetricVariant v, const Rational& eps,
                                     const EmbeddabilityOptions& opt) {
  if (m.n > 8) throw InputError("embeddability LP supports at most 8 points");
  if (eps < 0) throw InputError("eps must be nonnegative");
  EmbeddabilityResult res;
  res.variant = v;
  res.mode = opt.mode;
  res.eps = eps;
  const FiniteMetric target = opt.mode == EpsMode::Normalized ? normalized(m) : m;
  const ConstraintSystem cone = relaxed_cone(m.n, eps, opt.mode);
  res.vars = cone.vars;
  res.cone_rows = cone.rows.size() - 1;

  if (v == MetricVariant::Sum) {
    ConstraintSystem s = cone;
    ConstraintSystem rows = metric_rows(target, v, 0, eps);
    res.metric_rows = rows.rows.size();
    s.append(rows);
    CaseWork w = solve_case(s, 0);
    res.cases.push_back(w.outcome);
    if (opt.on_case) opt.on_case(0, w.artifact);
    res.sum_result = std::move(w.artifact);
  } else {
    const std::size_t npairs = metric_pairs(m.n).size();
    if (npairs > 32) throw InputError("too many pairs for case enumeration");
    std::vector<std::uint64_t> ids = opt.cases;
    if (ids.empty()) {
      ids.resize(std::size_t{1} << npairs);
      std::iota(ids.begin(), ids.end(), std::uint64_t{0});
    }
    res.metric_rows = metric_rows(target, v, 0, eps).rows.size();
    res.cases.resize(ids.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::map<std::size_t, FeasibilityResult> pending;
    std::size_t emit = 0;
    std::exception_ptr failure;
    auto worker = [&]() {
      try {
        for (std::size_t k; (k = next.fetch_add(1)) < ids.size();) {
          ConstraintSystem s = cone;
          s.append(metric_rows(target, v, ids[k], eps));
          CaseWork w = solve_case(s, ids[k]);
          std::lock_guard<std::mutex> lock(mu);
          res.cases[k] = w.outcome;
          if (opt.on_case) {
            pending.emplace(k, std::move(w.artifact));
            while (!pending.empty() && pending.begin()->first == emit) {
              opt.on_case(ids[emit], pending.begin()->second);
              pending.erase(pending.begin());
              ++emit;
            }
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next = ids.size();
      }
    };
    std::size_t nw = std::max<std::size_t>(1, std::min(opt.workers, ids.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nw; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  res.cases_total = res.cases.size();
  std::string all;
  for (const auto& c : res.cases) {
    if (c.verdict == Verdict::Infeasible)
      ++res.cases_infeasible;
    else if (!res.first_feasible_case)
      res.first_feasible_case = c.case_id;
    all += c.digest;
  }
  res.verdict = res.cases_infeasible == res.cases_total ? Verdict::Infeasible : Verdict::Feasible;
  res.certificate_digest = res.cases.size() == 1 ? res.cases[0].digest : sha256_hex(Bytes(all.begin(), all.end()));
  return res;
}

double min_cone_slack(const EntropicVector& h) {
  ConstraintSystem cone = shannon_cone_constraints(h.m);
  double worst = std::numeric_limits<double>::infinity();
  for (const Row& row : cone.rows) {
    if (row.rel != Relation::Ge) continue;
    CertifiedReal acc(Rational(0));
    for (const auto& [v, c] : row.coeffs) acc = acc + CertifiedReal(c) * h.h[v];
    acc = acc - CertifiedReal(row.rhs);
    worst = std::min(worst, acc.is_exact() ? acc.exact->get_d() : acc.bounds.lower());
  }
  return worst;
}

// ---- random embeddings -------------------------------------------------------------------------

void RandomEmbedding::check_lengths() const {
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const Factor& fac = factors[f];
    if (fac.codes.size() != metric.n) throw InputError("factor " + std::to_string(f) + " does not cover every point");
    for (std::size_t v = 0; v < fac.codes.size(); ++v) {
      std::optional<std::size_t> first;
      for (std::size_t w = 0; w < fac.prob.size(); ++w) {
        if (fac.prob[w] == 0) continue;
        if (!first) {
          first = w;
          continue;
        }
        if (fac.codes[v][w].size() != fac.codes[v][*first].size())
          throw InputError("code length of point " + std::to_string(v) + " depends on the outcome: factor " +
                           std::to_string(f) + ", outcomes " + std::to_string(*first) + " and " + std::to_string(w));
      }
    }
  }
}

namespace {

// -lb P[code_a = codes[a][w] | code_b = codes[b][w]] for every outcome w.
std::vector<CertifiedReal> conditional_surprisal(const Factor& f, std::size_t a, std::size_t b) {
  std::map<std::pair<std::string, std::string>, Rational> joint;
  std::map<std::string, Rational> marg;
  for (std::size_t w = 0; w < f.prob.size(); ++w) {
    if (f.prob[w] == 0) continue;
    joint[{f.codes[a][w], f.codes[b][w]}] += f.prob[w];
    marg[f.codes[b][w]] += f.prob[w];
  }
  std::vector<CertifiedReal> out;
  for (std::size_t w = 0; w < f.prob.size(); ++w) {
    if (f.prob[w] == 0) {
      out.emplace_back(Rational(0));
      continue;
    }
    Rational q = joint[{f.codes[a][w], f.codes[b][w]}] / marg[f.codes[b][w]];
    q.canonicalize();
    CertifiedReal l = certified_log2(q, kDefaultPrecisionBits);
    out.push_back(CertifiedReal(Rational(0)) - l);
  }
  return out;
}

double upper_of(const CertifiedReal& x) { return x.is_exact() ? x.exact->get_d() : x.bounds.upper(); }
double lower_of(const CertifiedReal& x) { return x.is_exact() ? x.exact->get_d() : x.bounds.lower(); }

bool same_value(const CertifiedReal& a, const CertifiedReal& b) {
  return a.is_exact() && b.is_exact() && *a.exact == *b.exact;
}

}  // namespace

std::vector<PairDistance> exact_distances(const RandomEmbedding& re) {
  std::vector<PairDistance> out;
  for (auto [i, j] : metric_pairs(re.points())) {
    PairDistance pd;
    pd.i = i;
    pd.j = j;
    CertifiedReal max_a(Rational(0)), max_b(Rational(0)), min_a(Rational(0)), min_b(Rational(0));
    std::vector<std::size_t> arg_a, arg_b;
    for (const Factor& f : re.factors) {
      auto sa = conditional_surprisal(f, i, j), sb = conditional_surprisal(f, j, i);
      std::size_t wa = 0, wb = 0, la = 0, lb = 0;
      bool first = true;
      for (std::size_t w = 0; w < f.prob.size(); ++w) {
        if (f.prob[w] == 0) continue;
        if (first) {
          wa = wb = la = lb = w;
          first = false;
          continue;
        }
        if (!same_value(sa[w], sa[wa]) || !same_value(sb[w], sb[wb])) pd.constant = false;
        if (upper_of(sa[w]) > upper_of(sa[wa])) wa = w;
        if (upper_of(sb[w]) > upper_of(sb[wb])) wb = w;
        if (lower_of(sa[w]) < lower_of(sa[la])) la = w;
        if (lower_of(sb[w]) < lower_of(sb[lb])) lb = w;
      }
      CertifiedReal mult(Rational(static_cast<unsigned long>(f.multiplicity)));
      max_a = max_a + mult * sa[wa];
      max_b = max_b + mult * sb[wb];
      min_a = min_a + mult * sa[la];
      min_b = min_b + mult * sb[lb];
      arg_a.push_back(wa);
      arg_b.push_back(wb);
    }
    pd.hi = certified_max(max_a, max_b);
    pd.lo = certified_max(min_a, min_b);
    pd.argmax = upper_of(max_a) >= upper_of(max_b) ? arg_a : arg_b;
    out.push_back(std::move(pd));
  }
  return out;
}

bool RandomEmbeddingReport::ok() const {
  return violations.empty() && std::all_of(representatives_ok.begin(), representatives_ok.end(), [](bool b) { return b; });
}

RandomEmbeddingReport verify_random_embedding(const EmbeddingFamily& family, const std::vector<std::size_t>& scales,
                                              double slack) {
  RandomEmbeddingReport rep;
  rep.scales = scales;
  for (std::size_t s : scales) {
    RandomEmbedding re = family(s);
    re.check_lengths();
    double worst = 0;
    for (const PairDistance& pd : exact_distances(re)) {
      if (!pd.constant) rep.omega_independent = false;
      double target = static_cast<double>(s) * re.metric(pd.i, pd.j).get_d();
      double dev = std::max(std::fabs(upper_of(pd.hi) - target), std::fabs(lower_of(pd.lo) - target));
      worst = std::max(worst, dev);
      if (dev > slack) rep.violations.push_back({pd.i, pd.j, s, pd.argmax, dev});
    }
    rep.max_deviation.push_back(worst);
    double bound = std::pow(static_cast<double>(s) + re.poly_c, re.poly_a);
    rep.representatives_ok.push_back(static_cast<double>(re.representatives) <= bound);
  }
  if (scales.size() >= 2) {
    std::vector<double> xs;
    for (std::size_t s : scales) xs.push_back(std::log2(static_cast<double>(s)));
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double my = std::accumulate(rep.max_deviation.begin(), rep.max_deviation.end(), 0.0) / static_cast<double>(xs.size());
    double num = 0, den = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      num += (xs[k] - mx) * (rep.max_deviation[k] - my);
      den += (xs[k] - mx) * (xs[k] - mx);
    }
    rep.slope = den == 0 ? 0 : num / den;
  }
  return rep;
}

RandomEmbedding from_distribution(const JointDistribution& j, const FiniteMetric& target, std::size_t s,
                                  const std::function<std::string(std::size_t, std::size_t)>& code) {
  if (target.n != j.m) throw InputError("target metric size does not match the variable count");
  Factor f;
  f.multiplicity = s;
  f.codes.assign(j.m, {});
  for (std::size_t st = 0; st < j.states(); ++st) {
    if (j.table[st] == 0) continue;
    f.prob.push_back(j.table[st]);
    for (std::size_t v = 0; v < j.m; ++v) f.codes[v].push_back(code(v, j.symbol(st, v)));
  }
  RandomEmbedding re;
  re.factors.push_back(std::move(f));
  re.metric = target;
  re.scale = s;
  re.representatives = j.m;
  re.poly_c = static_cast<double>(j.m);
  re.poly_a = 1;
  return re;
}

namespace {

std::string binary_code(std::size_t symbol, std::size_t width) {
  std::string s(width, '0');
  for (std::size_t k = 0; k < width; ++k)
    if ((symbol >> (width - 1 - k)) & 1) s[k] = '1';
  return s;
}

}  // namespace

RandomEmbedding xor_random_embedding(std::size_t s) {
  XorWitness x = k33_xor_witness();
  return from_distribution(x.dist, graph_metric(complete_bipartite(3, 3)), s, [](std::size_t, std::size_t sym) {
    std::size_t a = sym >> 1, b = sym & 1;
    return std::string{char('0' + a), char('0' + b), char('0' + (a ^ b))};
  });
}

RandomEmbedding cut_random_embedding(const std::vector<int>& side, std::size_t s) {
  RationalMatrix d = zero_matrix(side.size());
  for (std::size_t i = 0; i < side.size(); ++i)
    for (std::size_t j = 0; j < side.size(); ++j) d[i][j] = side[i] != side[j] ? 1 : 0;
  return from_distribution(cut_metric_witness(side), FiniteMetric(d), s,
                           [](std::size_t, std::size_t sym) { return binary_code(sym, 1); });
}

RandomEmbedding fair_bit_embedding(std::size_t s) {
  JointDistribution j = uniform_over({2, 2}, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  return from_distribution(j, discrete_metric(2), s, [](std::size_t, std::size_t sym) { return binary_code(sym, 1); });
}

RandomEmbedding interval_random_embedding(const std::vector<Rational>& points, std::size_t s, bool shared) {
  const std::size_t n = points.size();
  std::vector<std::size_t> t(n);
  RationalMatrix d = zero_matrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i] < 0 || points[i] > 1) throw InputError("interval points must lie in [0,1]");
    Rational v = points[i] * static_cast<unsigned long>(s);
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
    t[i] = q.get_ui();
    for (std::size_t j = 0; j < n; ++j) d[i][j] = points[i] > points[j] ? points[i] - points[j] : points[j] - points[i];
  }
  std::vector<std::size_t> cuts(t.begin(), t.end());
  cuts.push_back(0);
  cuts.push_back(s);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  RandomEmbedding re;
  re.metric = FiniteMetric(d);
  re.scale = s;
  re.representatives = s + 1;
  re.poly_c = 1;
  re.poly_a = 1;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    std::size_t lo = cuts[c], hi = cuts[c + 1];
    Factor f;
    f.multiplicity = hi - lo;
    f.codes.assign(n, {});
    // outcome (y, z) at every position of the segment; position k uses y when k < t
    for (unsigned y = 0; y < 2; ++y)
      for (unsigned z = 0; z < 2; ++z) {
        if (shared && y != z) continue;
        f.prob.push_back(make_rational(1, shared ? 2 : 4));
        for (std::size_t v = 0; v < n; ++v) f.codes[v].push_back(std::string(1, char('0' + (lo < t[v] ? y : z))));
      }
    re.factors.push_back(std::move(f));
  }
  return re;
}

RandomEmbedding trivial_embedding(std::size_t n) {
  RandomEmbedding re;
  Factor f;
  f.prob = {Rational(1)};
  f.codes.assign(n, std::vector<std::string>{""});
  re.factors.push_back(f);
  re.metric = FiniteMetric(zero_matrix(n));
  re.representatives = 1;
  re.poly_c = 1;
  re.poly_a = 0;
  return re;
}

RandomEmbedding product_random_embed(const RandomEmbedding& a, const RandomEmbedding& b) {
  a.check_lengths();
  b.check_lengths();
  const std::size_t na = a.points(), nb = b.points();
  RandomEmbedding p;
  RationalMatrix d = zero_matrix(na * nb);
  for (std::size_t v = 0; v < na; ++v)
    for (std::size_t w = 0; w < nb; ++w)
      for (std::size_t v2 = 0; v2 < na; ++v2)
        for (std::size_t w2 = 0; w2 < nb; ++w2) d[v * nb + w][v2 * nb + w2] = a.metric(v, v2) + b.metric(w, w2);
  p.metric = FiniteMetric(d);
  auto lift = [&](const Factor& f, bool left) {
    Factor g;
    g.prob = f.prob;
    g.multiplicity = f.multiplicity;
    g.codes.resize(na * nb);
    for (std::size_t v = 0; v < na; ++v)
      for (std::size_t w = 0; w < nb; ++w) g.codes[v * nb + w] = f.codes[left ? v : w];
    return g;
  };
  for (const Factor& f : a.factors) p.factors.push_back(lift(f, true));
  for (const Factor& f : b.factors) p.factors.push_back(lift(f, false));
  p.scale = std::max(a.scale, b.scale);
  p.representatives = a.representatives * b.representatives;
  p.poly_c = std::max(a.poly_c, b.poly_c);
  p.poly_a = a.poly_a + b.poly_a;
  return p;
}

std::vector<Bytes> derandomize_sample(const RandomEmbedding& re, std::uint64_t seed) {
  re.check_lengths();
  const std::size_t n = re.points();
  CounterRng rng(seed);
  std::vector<std::string> bits(n);
  for (const Factor& f : re.factors) {
    std::vector<double> cum;
    double acc = 0;
    for (const auto& p : f.prob) cum.push_back(acc += p.get_d());
    std::vector<std::size_t> draws(f.multiplicity);
    for (auto& w : draws) {
      if (f.prob.size() == 1) {
        w = 0;
        continue;
      }
      double u = rng.uniform() * acc;
      w = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
      w = std::min(w, f.prob.size() - 1);
      while (f.prob[w] == 0) w = (w + 1) % f.prob.size();
    }
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t len = 0;
      for (std::size_t w = 0; w < f.prob.size(); ++w)
        if (f.prob[w] != 0) len = f.codes[v][w].size();
      for (std::size_t l = 0; l < len; ++l)
        for (std::size_t w : draws) bits[v] += f.codes[v][w][l];
    }
  }
  std::vector<Bytes> out;
  for (const auto& b : bits) {
    Bytes x((b.size() + 7) / 8, 0);
    for (std::size_t k = 0; k < b.size(); ++k) set_bit(x, k, b[k] == '1');
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace metriclab
