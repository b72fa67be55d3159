#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "metriclab/entropic.hpp"
#include "metriclab/scale_embed.hpp"

using namespace metriclab;

namespace {

FiniteMetric k33() { return graph_metric(complete_bipartite(3, 3)); }

FiniteMetric k33_minus_edge() {
  GraphSpec g = complete_bipartite(3, 3), h(6, {});
  for (const auto& e : g.edges)
    if (!((e.u == 0 && e.v == 3) || (e.u == 3 && e.v == 0))) h.edges.push_back(e);
  return graph_metric(h);
}

// Entropy of every marginal by direct counting in doubles.
std::vector<double> entropy_oracle(const JointDistribution& j) {
  std::vector<double> h(std::size_t{1} << j.m, 0.0);
  for (std::size_t mask = 0; mask < h.size(); ++mask) {
    std::map<std::vector<std::size_t>, double> marg;
    for (std::size_t st = 0; st < j.states(); ++st) {
      double p = j.table[st].get_d();
      if (p == 0) continue;
      std::vector<std::size_t> key;
      for (std::size_t k = 0; k < j.m; ++k)
        if ((mask >> k) & 1) key.push_back(j.symbol(st, k));
      marg[key] += p;
    }
    for (const auto& [k, p] : marg) h[mask] -= p * std::log2(p);
  }
  return h;
}

double value(const CertifiedReal& x) { return x.is_exact() ? x.exact->get_d() : x.bounds.midpoint(); }

JointDistribution random_distribution(std::mt19937_64& rng, std::size_t m) {
  std::vector<std::size_t> alph;
  std::size_t states = 1;
  for (std::size_t k = 0; k < m; ++k) {
    alph.push_back(2 + rng() % 2);
    states *= alph.back();
  }
  std::vector<long> w(states);
  long total = 0;
  for (auto& x : w) {
    x = rng() % 3 == 0 ? 0 : 1 + static_cast<long>(rng() % 7);
    total += x;
  }
  if (total == 0) {
    w[0] = 1;
    total = 1;
  }
  std::vector<Rational> table;
  for (long x : w) table.push_back(make_rational(x, total));
  return JointDistribution(alph, table);
}

}  // namespace

TEST_CASE("entropies of simple laws") {
  JointDistribution bit({2}, {make_rational(1, 2), make_rational(1, 2)});
  auto h = joint_entropy_vector(bit);
  CHECK(h.all_exact());
  CHECK(*h.h[1].exact == 1);

  auto two = uniform_over({2, 2}, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(joint_entropy_vector(two).to_exact() == RationalVector{0, 1, 1, 2});

  JointDistribution third({2}, {make_rational(1, 3), make_rational(2, 3)});
  auto t = joint_entropy_vector(third);
  CHECK_FALSE(t.all_exact());
  CHECK_THROWS_AS(t.to_exact(), InconsistencyError);
  double want = -(1.0 / 3) * std::log2(1.0 / 3) - (2.0 / 3) * std::log2(2.0 / 3);
  CHECK(t.h[1].bounds.lower() <= want + 1e-15);
  CHECK(t.h[1].bounds.upper() >= want - 1e-15);
  CHECK(t.h[1].bounds.width() < 1e-12);
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(JointDistribution({2}, {make_rational(1, 2), make_rational(1, 3)}), InputError);
  CHECK_THROWS_AS(JointDistribution({2}, {make_rational(3, 2), make_rational(-1, 2)}), InputError);
  CHECK_THROWS_AS(JointDistribution({2, 2}, {Rational(1)}), InputError);
  CHECK_THROWS_AS(JointDistribution({0}, {}), InputError);
  CHECK_THROWS_AS(uniform_over(std::vector<std::size_t>(21, 2), {std::vector<std::size_t>(21, 0)}), InputError);

  JointDistribution j({2, 3, 2}, std::vector<Rational>(12, make_rational(1, 12)));
  for (std::size_t st = 0; st < j.states(); ++st)
    CHECK(j.index({j.symbol(st, 0), j.symbol(st, 1), j.symbol(st, 2)}) == st);
  CHECK(j.symbol(1, 0) == 1);
  CHECK(j.symbol(2, 1) == 1);
}

TEST_CASE("random laws match the counting oracle and lie in the cone") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    JointDistribution j = random_distribution(rng, 2 + trial % 3);
    auto h = joint_entropy_vector(j);
    auto want = entropy_oracle(j);
    for (std::size_t mask = 0; mask < want.size(); ++mask) {
      CHECK(h.h[mask].bounds.lower() <= want[mask] + 1e-12);
      CHECK(h.h[mask].bounds.upper() >= want[mask] - 1e-12);
    }
    CHECK(min_cone_slack(h) >= -1e-12);
  }
}

TEST_CASE("XOR witness reproduces the K33 path metric") {
  XorWitness x = k33_xor_witness();
  auto h = joint_entropy_vector(x.dist);
  REQUIRE(h.all_exact());
  auto want = entropy_oracle(x.dist);
  for (std::size_t mask = 0; mask < want.size(); ++mask) CHECK(value(h.h[mask]) == doctest::Approx(want[mask]));
  for (std::size_t i = 0; i < 6; ++i) CHECK(*h.h[std::size_t{1} << i].exact == 2);

  FiniteMetric d = info_distance_matrix(h);
  FiniteMetric g = k33();
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(d(i, j) == g(i, j));
  CHECK(d(0, 1) == 2);
  CHECK(d(0, 3) == 1);
  CHECK(*info_distance(x.dist, 0, 1).exact == 2);
  CHECK(*info_distance(h, 2, 2).exact == 0);
  CHECK(*conditional_entropy(h, 0, 3).exact == 1);
  CHECK(*info_distance(h, 0, 3, InfoVariant::Avg).exact == 1);

  CHECK(min_cone_slack(h) >= -1e-12);
  CHECK(x.labels.size() == 6);
}

TEST_CASE("avg and max variants differ on asymmetric pairs") {
  // X0 uniform on 4 symbols, X1 = its low bit
  auto j = uniform_over({4, 2}, {{0, 0}, {1, 1}, {2, 0}, {3, 1}});
  auto h = joint_entropy_vector(j);
  CHECK(*conditional_entropy(h, 0, 1).exact == 1);
  CHECK(*conditional_entropy(h, 1, 0).exact == 0);
  CHECK(*info_distance(h, 0, 1, InfoVariant::Max).exact == 1);
  CHECK(*info_distance(h, 0, 1, InfoVariant::Avg).exact == make_rational(1, 2));
  CHECK_THROWS_AS(conditional_entropy(h, 0, 2), InputError);
}

TEST_CASE("cut witnesses") {
  std::vector<int> side{0, 0, 1, 1, 1};
  auto h = joint_entropy_vector(cut_metric_witness(side));
  FiniteMetric d = info_distance_matrix(h);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(d(i, j) == (side[i] != side[j] ? 1 : 0));

  auto star = info_distance_matrix(joint_entropy_vector(cut_metric_witness({0, 1, 1, 1, 1})));
  for (std::size_t j = 1; j < 5; ++j) CHECK(star(0, j) == 1);
  CHECK(star(1, 2) == 0);

  CHECK_THROWS_AS(cut_metric_witness({1, 1, 1}), InputError);
  CHECK_THROWS_AS(cut_metric_witness({0, 2}), InputError);
}

TEST_CASE("Shannon cone census") {
  auto c6 = shannon_cone_constraints(6);
  CHECK(c6.vars == 64);
  CHECK(monotonicity_count(6) == 192);
  CHECK(submodularity_count(6) == 240);
  CHECK(c6.rows.size() == 433);
  CHECK(c6.rows.back().rel == Relation::Eq);
  std::size_t mono = 0, sub = 0;
  for (const auto& r : c6.rows) {
    if (r.tag.rfind("mono", 0) == 0) ++mono;
    if (r.tag.rfind("sub", 0) == 0) ++sub;
  }
  CHECK(mono == 192);
  CHECK(sub == 240);

  auto c2 = shannon_cone_constraints(2);
  CHECK(monotonicity_count(2) == 4);
  CHECK(submodularity_count(2) == 1);
  CHECK(c2.rows.size() == 6);

  for (std::size_t m = 2; m <= 10; ++m) {
    std::size_t mono_m = 0, sub_m = 0;
    for (std::size_t i = 0; i < m; ++i) mono_m += std::size_t{1} << (m - 1);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) sub_m += std::size_t{1} << (m - 2);
    CHECK(shannon_cone_constraints(m).rows.size() == mono_m + sub_m + 1);
  }
  CHECK_THROWS_AS(shannon_cone_constraints(1), InputError);
  CHECK_THROWS_AS(shannon_cone_constraints(11), InputError);
}

TEST_CASE("metric constraint systems") {
  RationalMatrix d2 = zero_matrix(2);
  d2[0][1] = d2[1][0] = 2;
  auto s = metric_constraints(FiniteMetric(d2), MetricVariant::Sum);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].rel == Relation::Eq);
  CHECK(row_satisfied(s.rows[0], evaluate_row(s.rows[0], RationalVector{0, 1, 1, 2})));

  auto h = joint_entropy_vector(k33_xor_witness().dist).to_exact();
  RationalVector half;
  for (const auto& x : h) half.push_back(x / 2);
  auto sum = metric_constraints(k33(), MetricVariant::Sum);
  CHECK(sum.rows.size() == 15);
  for (const auto& r : sum.rows) CHECK(row_satisfied(r, evaluate_row(r, half)));

  CHECK(metric_pairs(6).size() == 15);
  for (std::uint64_t c : {0ull, 1ull, 0x5555ull, 0x7fffull}) {
    auto mx = metric_constraints(k33(), MetricVariant::Max, c);
    CHECK(mx.rows.size() == 30);
    std::size_t eqs = 0;
    for (const auto& r : mx.rows) {
      eqs += r.rel == Relation::Eq;
      CHECK(row_satisfied(r, evaluate_row(r, h)));
    }
    CHECK(eqs == 15);
  }
  // bit k flips which conditional is pinned for pair k
  auto a = metric_constraints(k33(), MetricVariant::Max, 0), b = metric_constraints(k33(), MetricVariant::Max, 1);
  CHECK(a.rows[0].coeffs != b.rows[0].coeffs);
  CHECK(a.rows[2].coeffs == b.rows[2].coeffs);
}

TEST_CASE("K33 is not obstructed and the XOR point satisfies every row") {
  auto r = embeddability_lp(k33(), MetricVariant::Sum, Rational(0));
  CHECK(r.verdict == Verdict::Feasible);
  CHECK(r.vars == 64);
  CHECK(r.cone_rows == 432);
  CHECK(r.metric_rows == 15);
  REQUIRE(r.sum_result);
  auto s = embeddability_system(k33(), MetricVariant::Sum, Rational(0));
  CHECK(verify_certificate(s, *r.sum_result).ok);

  auto h = joint_entropy_vector(k33_xor_witness().dist).to_exact();
  FeasibilityResult witness;
  witness.verdict = Verdict::Feasible;
  for (const auto& x : h) witness.point.push_back(x / 2);
  CHECK(s.rows.size() == 448);
  CHECK(verify_certificate(s, witness).ok);
}

TEST_CASE("K33 minus an edge is obstructed") {
  FiniteMetric m = k33_minus_edge();
  CHECK(m(0, 3) == 3);
  for (const char* eps : {"0", "1/20"}) {
    CAPTURE(eps);
    auto r = embeddability_lp(m, MetricVariant::Sum, parse_rational(eps));
    CHECK(r.verdict == Verdict::Infeasible);
    REQUIRE(r.sum_result);
    auto s = embeddability_system(m, MetricVariant::Sum, parse_rational(eps));
    CHECK(verify_certificate(s, *r.sum_result).ok);

    FeasibilityResult back = parse_artifact(serialize_artifact(*r.sum_result));
    CHECK(back.multipliers == r.sum_result->multipliers);
    CHECK(verify_certificate(s, back).ok);
    std::string text = serialize_artifact(back);
    CHECK(sha256_hex(Bytes(text.begin(), text.end())).size() == 64);
  }
  // the band closes just past 1/12
  CHECK(embeddability_lp(m, MetricVariant::Sum, make_rational(83, 1000)).verdict == Verdict::Infeasible);
  CHECK(embeddability_lp(m, MetricVariant::Sum, make_rational(1, 12)).verdict == Verdict::Feasible);
}

TEST_CASE("relaxing the cone too loosens the obstruction") {
  FiniteMetric m = k33_minus_edge();
  EmbeddabilityOptions normalized;
  normalized.mode = EpsMode::Normalized;
  CHECK(embeddability_lp(m, MetricVariant::Sum, make_rational(1, 1000), normalized).verdict == Verdict::Infeasible);
  auto loose = embeddability_lp(m, MetricVariant::Sum, make_rational(1, 100), normalized);
  CHECK(loose.verdict == Verdict::Feasible);
  CHECK(verify_certificate(embeddability_system(m, MetricVariant::Sum, make_rational(1, 100), EpsMode::Normalized),
                           *loose.sum_result)
            .ok);

  EmbeddabilityOptions both;
  both.mode = EpsMode::BothRelaxed;
  CHECK(embeddability_lp(m, MetricVariant::Sum, make_rational(1, 50), both).verdict == Verdict::Infeasible);
  CHECK(embeddability_lp(m, MetricVariant::Sum, make_rational(3, 100), both).verdict == Verdict::Feasible);
  CHECK(std::string(eps_mode_name(EpsMode::Normalized)) == "normalized");
}

TEST_CASE("verdicts are scale invariant") {
  for (const FiniteMetric& m : {k33(), k33_minus_edge()}) {
    RationalMatrix d = m.d;
    for (auto& row : d)
      for (auto& x : row) x *= 2;
    CHECK(embeddability_lp(m, MetricVariant::Sum, Rational(0)).verdict ==
          embeddability_lp(FiniteMetric(d), MetricVariant::Sum, Rational(0)).verdict);
  }
}

TEST_CASE("max variant cases") {
  FiniteMetric m = k33_minus_edge();
  EmbeddabilityOptions opt;
  std::mt19937_64 rng(5);
  for (int k = 0; k < 48; ++k) opt.cases.push_back(rng() % 32768);
  opt.cases.push_back(0);
  opt.cases.push_back(32767);

  std::vector<std::uint64_t> seen;
  opt.on_case = [&](std::uint64_t id, const FeasibilityResult& r) {
    seen.push_back(id);
    CHECK(verify_certificate(embeddability_system(m, MetricVariant::Max, Rational(0), EpsMode::MetricBand, id), r).ok);
  };
  auto one = embeddability_lp(m, MetricVariant::Max, Rational(0), opt);
  CHECK(one.verdict == Verdict::Infeasible);
  CHECK(one.cases_total == opt.cases.size());
  CHECK(one.cases_infeasible == opt.cases.size());
  CHECK(seen == opt.cases);

  seen.clear();
  opt.workers = 3;
  auto three = embeddability_lp(m, MetricVariant::Max, Rational(0), opt);
  CHECK(seen == opt.cases);
  CHECK(three.certificate_digest == one.certificate_digest);
  for (std::size_t k = 0; k < one.cases.size(); ++k) CHECK(three.cases[k].digest == one.cases[k].digest);

  auto band = embeddability_lp(m, MetricVariant::Max, make_rational(1, 20), EmbeddabilityOptions{EpsMode::MetricBand, 1, {0, 777, 32767}, {}});
  CHECK(band.cases_infeasible == 3);

  auto whole = embeddability_lp(k33(), MetricVariant::Max, Rational(0), EmbeddabilityOptions{EpsMode::MetricBand, 1, {0, 1, 2}, {}});
  CHECK(whole.verdict == Verdict::Feasible);
  REQUIRE(whole.first_feasible_case);
  CHECK(*whole.first_feasible_case == 0);
}

TEST_CASE("max variant enumerates every case of a small metric") {
  // triangle 1,1,2 on the path 0-1-2: 3 pairs, 8 cases
  auto r = embeddability_lp(graph_metric(path_graph(3)), MetricVariant::Max, Rational(0));
  CHECK(r.cases_total == 8);
  std::set<std::uint64_t> ids;
  for (const auto& c : r.cases) ids.insert(c.case_id);
  CHECK(ids.size() == 8);
  CHECK(r.verdict == Verdict::Feasible);
}

TEST_CASE("embeddability input checks") {
  CHECK_THROWS_AS(embeddability_lp(discrete_metric(9), MetricVariant::Sum, Rational(0)), InputError);
  CHECK_THROWS_AS(embeddability_lp(k33(), MetricVariant::Sum, Rational(-1)), InputError);
  CHECK_THROWS_AS(embeddability_system(k33(), MetricVariant::Sum, Rational(-1)), InputError);
  CHECK_THROWS_AS(parse_artifact("maybe\n1\n"), InputError);
  CHECK_THROWS_AS(parse_artifact(""), InputError);
}

TEST_CASE("XOR random embedding is exact at every scale") {
  XorWitness x = k33_xor_witness();
  // conditional probabilities by counting outcomes
  auto oracle = [&](std::size_t i, std::size_t j) {
    double worst = 0;
    for (std::size_t st = 0; st < x.dist.states(); ++st) {
      if (x.dist.table[st] == 0) continue;
      int both = 0, given = 0, rev = 0;
      for (std::size_t t = 0; t < x.dist.states(); ++t) {
        if (x.dist.table[t] == 0) continue;
        bool ej = x.dist.symbol(t, j) == x.dist.symbol(st, j), ei = x.dist.symbol(t, i) == x.dist.symbol(st, i);
        given += ej;
        rev += ei;
        both += ei && ej;
      }
      worst = std::max({worst, -std::log2(double(both) / given), -std::log2(double(both) / rev)});
    }
    return worst;
  };
  for (std::size_t s : {1, 4, 64}) {
    auto re = xor_random_embedding(s);
    for (const auto& pd : exact_distances(re)) {
      CHECK(pd.constant);
      REQUIRE(pd.hi.is_exact());
      CHECK(*pd.hi.exact == re.metric(pd.i, pd.j) * static_cast<unsigned long>(s));
      CHECK(*pd.lo.exact == *pd.hi.exact);
      CHECK(pd.hi.exact->get_d() == doctest::Approx(oracle(pd.i, pd.j) * double(s)));
    }
  }
  auto rep = verify_random_embedding(xor_random_embedding, {1, 16, 256}, 0);
  CHECK(rep.ok());
  CHECK(rep.omega_independent);
  for (double d : rep.max_deviation) CHECK(d == 0);
}

TEST_CASE("interval random embedding stays within one bit") {
  std::vector<Rational> pts{Rational(0), make_rational(1, 3), make_rational(1, 2), make_rational(7, 10), Rational(1)};
  for (std::size_t s : {10, 100, 999}) {
    auto re = interval_random_embedding(pts, s);
    for (const auto& pd : exact_distances(re)) {
      CHECK(pd.constant);
      // D = |t - t'| with t = ceil(r s)
      auto t = [&](const Rational& r) {
        Rational v = r * static_cast<unsigned long>(s);
        mpz_class q;
        mpz_cdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
        return q.get_si();
      };
      CHECK(*pd.hi.exact == Rational(std::labs(t(pts[pd.i]) - t(pts[pd.j]))));
    }
  }
  auto rep = verify_random_embedding([&](std::size_t s) { return interval_random_embedding(pts, s); }, {10, 100, 1000});
  CHECK(rep.ok());

  auto bad = verify_random_embedding([&](std::size_t s) { return interval_random_embedding(pts, s, true); }, {100});
  CHECK_FALSE(bad.ok());
  REQUIRE_FALSE(bad.violations.empty());
  CHECK(bad.violations[0].s == 100);
  CHECK_THROWS_AS(interval_random_embedding({make_rational(3, 2)}, 10), InputError);
}

TEST_CASE("random embedding products add distances") {
  auto sq = product_random_embed(fair_bit_embedding(5), fair_bit_embedding(5));
  CHECK(sq.points() == 4);
  auto d = exact_distances(sq);
  for (const auto& pd : d) {
    std::size_t hi = (pd.i >> 1) != (pd.j >> 1), lo = (pd.i & 1) != (pd.j & 1);
    CHECK(*pd.hi.exact == Rational(static_cast<unsigned long>(5 * (hi + lo))));
    CHECK(sq.metric(pd.i, pd.j) == Rational(static_cast<unsigned long>(hi + lo)));
  }

  auto a = xor_random_embedding(3);
  auto c = cut_random_embedding({0, 1, 1}, 3);
  auto p = product_random_embed(a, c);
  CHECK(p.points() == 18);
  auto da = exact_distances(a), dc = exact_distances(c), dp = exact_distances(p);
  auto lookup = [](const std::vector<PairDistance>& v, std::size_t i, std::size_t j) {
    if (i == j) return Rational(0);
    for (const auto& pd : v)
      if ((pd.i == i && pd.j == j) || (pd.i == j && pd.j == i)) return *pd.hi.exact;
    return Rational(-1);
  };
  for (const auto& pd : dp) {
    CHECK(*pd.hi.exact == lookup(da, pd.i / 3, pd.j / 3) + lookup(dc, pd.i % 3, pd.j % 3));
    CHECK(*pd.hi.exact == p.metric(pd.i, pd.j) * 3);
  }

  auto id = product_random_embed(a, trivial_embedding(1));
  auto di = exact_distances(id);
  for (std::size_t k = 0; k < di.size(); ++k) CHECK(*di[k].hi.exact == *da[k].hi.exact);
  CHECK(id.metric == a.metric);

  RandomEmbedding uneven = fair_bit_embedding(1);
  uneven.factors[0].codes[0][1] = "01";
  CHECK_THROWS_AS(uneven.check_lengths(), InputError);
  CHECK_THROWS_AS(product_random_embed(uneven, a), InputError);
}

TEST_CASE("representative bound") {
  auto rep = verify_random_embedding(xor_random_embedding, {2, 8});
  CHECK(rep.representatives_ok == std::vector<bool>{true, true});
  auto bad = verify_random_embedding([](std::size_t s) {
    auto re = fair_bit_embedding(s);
    re.representatives = 1000;
    re.poly_c = 0;
    re.poly_a = 1;
    return re;
  }, {4});
  CHECK_FALSE(bad.ok());
}

TEST_CASE("derandomized samples") {
  auto t1 = derandomize_sample(trivial_embedding(3), 1), t2 = derandomize_sample(trivial_embedding(3), 99);
  CHECK(t1 == t2);

  auto re = xor_random_embedding(2048);
  auto a = derandomize_sample(re, 1), b = derandomize_sample(re, 2);
  REQUIRE(a.size() == 6);
  CHECK(a != b);
  CHECK(a[0].size() * 8 == 3 * 2048);
  // track layout: third block is the XOR of the first two
  for (std::size_t k = 0; k < 2048; ++k) CHECK((get_bit(a[0], k) ^ get_bit(a[0], 2048 + k)) == get_bit(a[0], 4096 + k));

  auto codec = make_codec("lz77x");
  for (const auto& strings : {a, b}) {
    auto rep = verify_strings({strings}, {2048}, re.metric, *codec);
    CHECK(rep.rated == 15);
    CHECK(rep.in_band == 15);
    CHECK(rep.rank_correlation >= 0.95);
  }
}
