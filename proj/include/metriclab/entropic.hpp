#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metriclab/compression.hpp"
#include "metriclab/interval.hpp"
#include "metriclab/lp.hpp"
#include "metriclab/metric.hpp"

namespace metriclab {

/// Joint law of m discrete variables. State index = sum_k x_k * stride_k with variable 0 fastest.
struct JointDistribution {
  std::size_t m = 0;
  std::vector<std::size_t> alphabets;
  std::vector<Rational> table;

  static constexpr std::size_t kMaxStates = std::size_t{1} << 20;

  JointDistribution() = default;
  /// Throws InputError on negative entries, a total other than 1, or more than kMaxStates states.
  JointDistribution(std::vector<std::size_t> alphabets, std::vector<Rational> table);

  std::size_t states() const { return table.size(); }
  std::size_t symbol(std::size_t state, std::size_t var) const;
  std::size_t index(const std::vector<std::size_t>& symbols) const;
};

/// Uniform law over the listed outcomes; each outcome gives the symbol of every variable.
JointDistribution uniform_over(std::vector<std::size_t> alphabets,
                               const std::vector<std::vector<std::size_t>>& outcomes);

struct EntropicVector {
  std::size_t m = 0;
  std::vector<CertifiedReal> h;  // indexed by subset bitmask, bits
  bool all_exact() const;
  /// Exact entries as rationals; throws InconsistencyError if any entry is irrational.
  RationalVector to_exact() const;
};

/// Entropies of all marginals; exact when every marginal probability is a power of 2.
EntropicVector joint_entropy_vector(const JointDistribution& j, unsigned precision_bits = 128);

enum class InfoVariant { Max, Avg };

/// H(X_i | X_j) from an entropic vector.
CertifiedReal conditional_entropy(const EntropicVector& h, std::size_t i, std::size_t j);
/// max{H(i|j), H(j|i)}, or (H(i|j) + H(j|i)) / 2 for Avg. Zero on the diagonal.
CertifiedReal info_distance(const EntropicVector& h, std::size_t i, std::size_t j, InfoVariant v = InfoVariant::Max);
CertifiedReal info_distance(const JointDistribution& j, std::size_t a, std::size_t b, InfoVariant v = InfoVariant::Max);
/// All pairwise info distances; throws InconsistencyError if an entry is irrational.
FiniteMetric info_distance_matrix(const EntropicVector& h, InfoVariant v = InfoVariant::Max);

struct XorWitness {
  JointDistribution dist;              // six variables over {0..3}; symbol = 2a + b for the pair (a, b)
  std::vector<std::string> labels;     // X1 = TU, ...
};

/// Four fair bits T, U, V, W; X1 = TU, X2 = VW, X3 = (T^V)(U^W), X4 = TV, X5 = UW, X6 = (T^U)(V^W).
/// Variables 0..2 form one side of K_{3,3}, 3..5 the other.
XorWitness k33_xor_witness();

/// side[k] in {0, 1}; variables on side 0 copy U, on side 1 copy V. Throws InputError if a side is empty.
JointDistribution cut_metric_witness(const std::vector<int>& side);

/// Elemental monotonicity and submodularity over 2^m variables, then h(empty) = 0 as the last row.
ConstraintSystem shannon_cone_constraints(std::size_t m);
std::size_t monotonicity_count(std::size_t m);
std::size_t submodularity_count(std::size_t m);

enum class MetricVariant { Sum, Max };

/// Pairs (i < j) in lexicographic order; case bit k refers to pair k.
std::vector<std::pair<std::size_t, std::size_t>> metric_pairs(std::size_t n);

/// Sum: 2h_ij - h_i - h_j = d_ij. Max: bit k of case_id set means H(j|i) = d and H(i|j) <= d,
/// clear means H(i|j) = d and H(j|i) <= d.
ConstraintSystem metric_constraints(const FiniteMetric& m, MetricVariant v, std::uint64_t case_id = 0);

/// How eps enters the LP.
///  MetricBand: cone exact; metric equalities become d - eps <= . <= d + eps, inequalities <= d + eps.
///  BothRelaxed: as MetricBand, and every cone inequality becomes >= -eps.
///  Normalized: d rescaled to sum 1 over pairs, then BothRelaxed.
enum class EpsMode { MetricBand, BothRelaxed, Normalized };
const char* eps_mode_name(EpsMode e);

ConstraintSystem embeddability_system(const FiniteMetric& m, MetricVariant v, const Rational& eps,
                                      EpsMode mode = EpsMode::MetricBand, std::uint64_t case_id = 0);

struct CaseOutcome {
  std::uint64_t case_id = 0;
  Verdict verdict = Verdict::Infeasible;
  std::string route;       // how the exact verdict was reached
  std::string digest;      // SHA-256 of the serialized artifact
  std::size_t float_pivots = 0;
  bool float_disagreed = false;
};

struct EmbeddabilityResult {
  MetricVariant variant = MetricVariant::Sum;
  EpsMode mode = EpsMode::MetricBand;
  Rational eps;
  Verdict verdict = Verdict::Infeasible;  // Infeasible iff every case is infeasible
  std::size_t cases_total = 1;
  std::size_t cases_infeasible = 0;
  std::vector<CaseOutcome> cases;
  std::optional<FeasibilityResult> sum_result;  // full artifact for the sum variant
  std::optional<std::uint64_t> first_feasible_case;
  std::string certificate_digest;  // digest over all case digests in case order
  std::size_t vars = 0, cone_rows = 0, metric_rows = 0;
};

struct EmbeddabilityOptions {
  EpsMode mode = EpsMode::MetricBand;
  std::size_t workers = 1;
  /// Max variant only: restrict to these cases (all 2^pairs when empty).
  std::vector<std::uint64_t> cases;
  /// Called once per finished case with its exact artifact, in case order.
  std::function<void(std::uint64_t, const FeasibilityResult&)> on_case;
};

/// Throws InputError for n > 8; eps must be >= 0.
EmbeddabilityResult embeddability_lp(const FiniteMetric& m, MetricVariant v, const Rational& eps,
                                     const EmbeddabilityOptions& opt = {});

/// Text form of an LP artifact: "<verdict>\n" then one "p/q" per line. Used for digests and sidecars.
std::string serialize_artifact(const FeasibilityResult& r);
FeasibilityResult parse_artifact(const std::string& text);

/// Checks a Shannon-cone inequality system on an entropic vector; returns the smallest lower bound of any row slack.
double min_cone_slack(const EntropicVector& h);

// ---- random embeddings -------------------------------------------------------------------------

/// Independent finite factor, repeated `multiplicity` times: outcome w has probability prob[w] and
/// gives domain point v the bit code codes[v][w].
struct Factor {
  std::vector<Rational> prob;
  std::vector<std::vector<std::string>> codes;
  std::size_t multiplicity = 1;
};

struct RandomEmbedding {
  std::vector<Factor> factors;
  FiniteMetric metric;        // target d on the domain
  std::size_t scale = 1;
  std::size_t representatives = 0;  // |V_s|
  double poly_c = 0, poly_a = 1;    // declared bound |V_s| <= (s + c)^a

  std::size_t points() const { return metric.n; }
  /// Throws InputError if a code length depends on the outcome.
  void check_lengths() const;
};

using EmbeddingFamily = std::function<RandomEmbedding(std::size_t s)>;

/// s independent copies of the XOR witness; each variable codes its pair (a, b) as a, b, a^b.
RandomEmbedding xor_random_embedding(std::size_t s);
/// Cut witness copied s times.
RandomEmbedding cut_random_embedding(const std::vector<int>& side, std::size_t s);
/// Two points, each an independent fair bit, s copies.
RandomEmbedding fair_bit_embedding(std::size_t s);
/// x^r = y_{<t} z_{t:s}, t = ceil(r s), for fresh uniform y, z. With shared_streams, y = z.
RandomEmbedding interval_random_embedding(const std::vector<Rational>& points, std::size_t s,
                                          bool shared_streams = false);
/// One outcome, constant empty codes, zero metric on n points.
RandomEmbedding trivial_embedding(std::size_t n);

/// JointDistribution copied s times; code_bits(v, symbol) gives the code of a symbol.
RandomEmbedding from_distribution(const JointDistribution& j, const FiniteMetric& target, std::size_t s,
                                  const std::function<std::string(std::size_t, std::size_t)>& code);

/// Product on V x W; point (v, w) has index v * |W| + w. Throws InputError if either factor fails check_lengths.
RandomEmbedding product_random_embed(const RandomEmbedding& a, const RandomEmbedding& b);

struct PairDistance {
  std::size_t i = 0, j = 0;
  CertifiedReal lo, hi;    // range of D_ij(w) over outcomes
  bool constant = true;    // D_ij does not depend on w
  std::vector<std::size_t> argmax;  // per-factor outcome maximizing D
};

/// D_ij(w) = max{-lb P[X_i | X_j], -lb P[X_j | X_i]} evaluated exactly over all outcomes.
std::vector<PairDistance> exact_distances(const RandomEmbedding& re);

struct RandomEmbeddingViolation {
  std::size_t i = 0, j = 0, s = 0;
  std::vector<std::size_t> outcome;  // per-factor outcome index
  double deviation = 0;
};

struct RandomEmbeddingReport {
  std::vector<std::size_t> scales;
  std::vector<double> max_deviation;   // per scale: max |D - s d|
  std::vector<bool> representatives_ok;
  double slope = 0;                    // fit of max deviation against lb s
  std::vector<RandomEmbeddingViolation> violations;
  bool omega_independent = true;
  bool ok() const;
};

RandomEmbeddingReport verify_random_embedding(const EmbeddingFamily& family, const std::vector<std::size_t>& scales,
                                              double slack = 1);

/// Strings x_v = Phi(v, w0) for w0 drawn from the seed. Each factor contributes code bit l of all
/// copies consecutively, for l = 0, 1, ...
std::vector<Bytes> derandomize_sample(const RandomEmbedding& re, std::uint64_t seed);

}  // namespace metriclab
