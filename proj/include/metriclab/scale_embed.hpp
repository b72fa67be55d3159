#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metriclab/compression.hpp"
#include "metriclab/metric.hpp"

namespace metriclab {

/// Bit string packed MSB first; pad() zero bits fill out the bytes.
struct BitString {
  Bytes bytes;
  std::size_t bits = 0;
  std::size_t pad() const { return bytes.size() * 8 - bits; }
  void append(const Bytes& src, std::size_t from, std::size_t count);
  void push(int bit);
};

using DomainPoint = std::vector<Rational>;

class StringEmbedder {
 public:
  virtual ~StringEmbedder() = default;
  virtual std::string kind() const = 0;
  /// Coordinates per domain point.
  virtual std::size_t arity() const = 0;
  virtual BitString emit(const DomainPoint& v, std::size_t s) const = 0;
  /// Target distance d(v, v'); the embedding aims for s * d.
  virtual Rational target(const DomainPoint& a, const DomainPoint& b) const = 0;
  virtual std::size_t length_bits(std::size_t s) const = 0;

  BitString emit(const DomainPoint& v) const { return emit(v, scale); }

  std::size_t scale = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

using EmbedderPtr = std::shared_ptr<const StringEmbedder>;

/// Blocks v_i, w_i of s bits; u maps to x_1..x_m with x_i = v_i if u_i = 0 else w_i.
EmbedderPtr hamming_scale_embed(std::size_t m, std::size_t s, std::uint64_t seed);

/// y_{<t} z_{t:s} with t = ceil(r s). Throws InputError for r outside [0,1].
BitString interval_string_embed(const Rational& r, std::size_t s, std::uint64_t seed);
EmbedderPtr interval_string_embedder(std::size_t s, std::uint64_t seed);

/// Rational approximation of (sqrt 5 - 1)/2 with denominator above 2^40.
const Rational& golden_gamma();

struct DiscrepancyRecord {
  Rational r;
  std::size_t s = 0;
  std::size_t count = 0;
  double bound = 0;  // 3 + 2.45 lb s
  bool within = false;
};

/// b_i = [i*gamma mod 1 <= r] for i = 1..s.
std::vector<std::uint8_t> lowdisc_bits(const Rational& r, std::size_t s, const Rational& gamma = golden_gamma(),
                                       DiscrepancyRecord* record = nullptr);
/// Decides |count - s r| <= 3 + 2.45 lb s, with an interval check near the boundary.
bool discrepancy_within(std::size_t count, std::size_t s, const Rational& r);

struct DiscrepancySweep {
  std::optional<std::size_t> first_violation;
  double worst_slack = 0;  // min over s of bound - |count - s r|
  std::size_t worst_s = 0;
};

/// The bound for every prefix s = 1..s_max of one bit sequence.
DiscrepancySweep discrepancy_sweep(const Rational& r, std::size_t s_max, const Rational& gamma = golden_gamma());

/// x_i = y_i where b_i = 0 and z_i where b_i = 1, bits taken for r_s = ceil(r s)/s.
BitString interval_sequence_embed(const Rational& r, std::size_t s, std::uint64_t seed,
                                  const Rational& gamma = golden_gamma());
EmbedderPtr interval_sequence_embedder(std::size_t s, std::uint64_t seed, const Rational& gamma = golden_gamma());

inline constexpr std::size_t kInterleaveBytes = 256;

/// Round-robin interleaving of component outputs in kInterleaveBytes blocks; target is the sum.
/// Throws InputError on mismatched scales or repeated seeds.
EmbedderPtr product_scale_embed(const std::vector<EmbedderPtr>& parts);

/// Affine pre-map of each coordinate to [0,1]; coordinate i uses scale s (b_i - a_i). Target is l1.
EmbedderPtr box_scale_embed(const std::vector<std::pair<Rational, Rational>>& bounds, std::size_t s,
                            std::uint64_t seed);

/// Point i -> independent random stream i; target is the discrete metric. Points are {i}.
EmbedderPtr simplex_scale_embed(std::size_t m, std::size_t s, std::uint64_t seed);

struct RatioRow {
  std::size_t i = 0, j = 0;
  std::size_t s = 0;
  Rational target;  // d(v_i, v_j)
  double d_hat = 0;
  double ratio = 0;  // d_hat / (s d); 0 when excluded
  bool excluded = false;
};

struct ScaleReport {
  std::vector<RatioRow> rows;
  double band_lo = 0.7, band_hi = 1.3;
  std::size_t rated = 0, in_band = 0;
  double fraction_in_band = 0;
  double rank_correlation = 0;  // Goodman-Kruskal gamma between d_hat and s d
  double spearman = 0;
  double residual_slope = 0;    // least-squares slope of mean |d_hat - s d| against lb s
  bool zero_pairs_ok = true;    // every d = 0 pair had d_hat = 0
  std::string codec;
};

using TargetFn = std::function<Rational(const DomainPoint&, const DomainPoint&)>;

ScaleReport verify_scale_embedding(const StringEmbedder& e, const std::vector<DomainPoint>& points,
                                   const std::vector<std::size_t>& scales, const Codec& codec, double lo = 0.7,
                                   double hi = 1.3, std::size_t workers = 1, const TargetFn& target = {});

/// Same harness over precomputed strings (index k of strings_per_scale[si] is point k at scales[si]).
ScaleReport verify_strings(const std::vector<std::vector<Bytes>>& strings_per_scale,
                           const std::vector<std::size_t>& scales, const FiniteMetric& target, const Codec& codec,
                           double lo = 0.7, double hi = 1.3, std::size_t workers = 1);

double goodman_kruskal_gamma(const std::vector<double>& a, const std::vector<double>& b);
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

struct PackingReport {
  std::vector<std::size_t> packing;  // indices of the greedy packing, pairwise distance >= 2 eps
  std::size_t max_ball = 0;          // max over packing centres of |B_r(v) ∩ packing|
  std::size_t argmax = 0;
  // s in [1, s_max] with s > c lb s / (2 eps) and max_ball > 2^(s r + c lb s + b)
  std::vector<std::size_t> obstructed_scales;
  std::size_t s_max = 0;
};

PackingReport packing_obstruction(const FiniteMetric& m, const Rational& eps, const Rational& r, double c = 0,
                                  double b = 0, std::size_t s_max = 256);

}  // namespace metriclab
