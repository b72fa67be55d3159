#include "metriclab/scale_embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include "metriclab/interval.hpp"
#include "metriclab/prng.hpp"

namespace metriclab {

void BitString::push(int bit) {
  if (bits % 8 == 0) bytes.push_back(0);
  if (bit) bytes.back() |= static_cast<std::uint8_t>(0x80u >> (bits % 8));
  ++bits;
}

void BitString::append(const Bytes& src, std::size_t from, std::size_t count) {
  if (bits % 8 == 0 && from % 8 == 0) {
    std::size_t whole = count / 8;
    bytes.insert(bytes.end(), src.begin() + static_cast<std::ptrdiff_t>(from / 8),
                 src.begin() + static_cast<std::ptrdiff_t>(from / 8 + whole));
    bits += whole * 8;
    from += whole * 8;
    count -= whole * 8;
  }
  for (std::size_t k = 0; k < count; ++k) push(get_bit(src, from + k));
}

namespace {

std::size_t ceil_mul(const Rational& r, std::size_t s) {
  Rational v = r * static_cast<unsigned long>(s);
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
  return q.get_ui();
}

void check_unit(const Rational& r) {
  if (r < 0 || r > 1)
    throw InputError("point " + to_string(r) +
                     " lies outside [0,1]; map [a,b] affinely first, r -> (r - floor(a)) / (ceil(b) - floor(a))");
}

Rational abs_diff(const Rational& a, const Rational& b) { return a > b ? Rational(a - b) : Rational(b - a); }

BitString interleave(const std::vector<BitString>& parts) {
  BitString out;
  std::vector<std::size_t> at(parts.size(), 0);
  bool more = true;
  while (more) {
    more = false;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const Bytes& b = parts[k].bytes;
      if (at[k] >= b.size()) continue;
      std::size_t take = std::min(kInterleaveBytes, b.size() - at[k]);
      out.bytes.insert(out.bytes.end(), b.begin() + static_cast<std::ptrdiff_t>(at[k]),
                       b.begin() + static_cast<std::ptrdiff_t>(at[k] + take));
      at[k] += take;
      more = true;
    }
  }
  for (const auto& p : parts) out.bits += p.bits;
  return out;
}

class CubeEmbedder : public StringEmbedder {
 public:
  explicit CubeEmbedder(std::size_t m) : m_(m) {}
  std::string kind() const override { return "cube"; }
  std::size_t arity() const override { return m_; }
  std::size_t length_bits(std::size_t s) const override { return m_ * s; }
  BitString emit(const DomainPoint& u, std::size_t s) const override {
    if (u.size() != m_) throw InputError("cube point has the wrong length");
    BitString out;
    for (std::size_t i = 0; i < m_; ++i) {
      if (u[i] != 0 && u[i] != 1) throw InputError("cube coordinates must be 0 or 1");
      Bytes block = random_string(s, derive_seed(seed, 2 * i + (u[i] == 1 ? 1 : 0)));
      out.append(block, 0, s);
    }
    return out;
  }
  Rational target(const DomainPoint& a, const DomainPoint& b) const override {
    Rational d = 0;
    for (std::size_t i = 0; i < m_; ++i) d += a[i] != b[i] ? 1 : 0;
    return d;
  }

 private:
  std::size_t m_;
};

class IntervalEmbedder : public StringEmbedder {
 public:
  explicit IntervalEmbedder(bool sequence, Rational gamma = golden_gamma())
      : sequence_(sequence), gamma_(std::move(gamma)) {}
  std::string kind() const override { return sequence_ ? "interval_sequence" : "interval"; }
  std::size_t arity() const override { return 1; }
  std::size_t length_bits(std::size_t s) const override { return s; }
  BitString emit(const DomainPoint& v, std::size_t s) const override {
    if (v.size() != 1) throw InputError("interval point must have one coordinate");
    return sequence_ ? interval_sequence_embed(v[0], s, seed, gamma_) : interval_string_embed(v[0], s, seed);
  }
  Rational target(const DomainPoint& a, const DomainPoint& b) const override { return abs_diff(a[0], b[0]); }

 private:
  bool sequence_;
  Rational gamma_;
};

class ProductEmbedder : public StringEmbedder {
 public:
  explicit ProductEmbedder(std::vector<EmbedderPtr> parts) : parts_(std::move(parts)) {}
  std::string kind() const override { return "product"; }
  std::size_t arity() const override {
    std::size_t a = 0;
    for (const auto& p : parts_) a += p->arity();
    return a;
  }
  std::size_t length_bits(std::size_t s) const override {
    std::size_t n = 0;
    for (const auto& p : parts_) n += p->length_bits(s);
    return n;
  }
  BitString emit(const DomainPoint& v, std::size_t s) const override {
    if (v.size() != arity()) throw InputError("product point has the wrong length");
    std::vector<BitString> out;
    std::size_t at = 0;
    for (const auto& p : parts_) {
      DomainPoint part(v.begin() + static_cast<std::ptrdiff_t>(at),
                       v.begin() + static_cast<std::ptrdiff_t>(at + p->arity()));
      out.push_back(p->emit(part, s));
      at += p->arity();
    }
    return parts_.size() == 1 ? out[0] : interleave(out);
  }
  Rational target(const DomainPoint& a, const DomainPoint& b) const override {
    Rational d = 0;
    std::size_t at = 0;
    for (const auto& p : parts_) {
      auto lo = static_cast<std::ptrdiff_t>(at), hi = static_cast<std::ptrdiff_t>(at + p->arity());
      d += p->target(DomainPoint(a.begin() + lo, a.begin() + hi), DomainPoint(b.begin() + lo, b.begin() + hi));
      at += p->arity();
    }
    return d;
  }

 private:
  std::vector<EmbedderPtr> parts_;
};

class BoxEmbedder : public StringEmbedder {
 public:
  explicit BoxEmbedder(std::vector<std::pair<Rational, Rational>> bounds) : bounds_(std::move(bounds)) {}
  std::string kind() const override { return "box"; }
  std::size_t arity() const override { return bounds_.size(); }
  std::size_t coordinate_scale(std::size_t i, std::size_t s) const {
    return ceil_mul(bounds_[i].second - bounds_[i].first, s);
  }
  std::size_t length_bits(std::size_t s) const override {
    std::size_t n = 0;
    for (std::size_t i = 0; i < bounds_.size(); ++i) n += coordinate_scale(i, s);
    return n;
  }
  BitString emit(const DomainPoint& v, std::size_t s) const override {
    if (v.size() != bounds_.size()) throw InputError("box point has the wrong dimension");
    std::vector<BitString> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& [a, b] = bounds_[i];
      if (v[i] < a || v[i] > b) throw InputError("point coordinate " + std::to_string(i) + " lies outside the box");
      Rational u = (v[i] - a) / (b - a);
      u.canonicalize();
      out.push_back(interval_string_embed(u, coordinate_scale(i, s), derive_seed(seed, i)));
    }
    return out.size() == 1 ? out[0] : interleave(out);
  }
  Rational target(const DomainPoint& a, const DomainPoint& b) const override {
    Rational d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += abs_diff(a[i], b[i]);
    return d;
  }

 private:
  std::vector<std::pair<Rational, Rational>> bounds_;
};

class SimplexEmbedder : public StringEmbedder {
 public:
  explicit SimplexEmbedder(std::size_t m) : m_(m) {}
  std::string kind() const override { return "simplex"; }
  std::size_t arity() const override { return 1; }
  std::size_t length_bits(std::size_t s) const override { return s; }
  BitString emit(const DomainPoint& v, std::size_t s) const override {
    if (v.size() != 1 || v[0] < 0 || v[0] >= static_cast<unsigned long>(m_) || !is_integer(v[0]))
      throw InputError("simplex point must be an index below " + std::to_string(m_));
    BitString out;
    out.append(random_string(s, derive_seed(seed, v[0].get_num().get_ui())), 0, s);
    return out;
  }
  Rational target(const DomainPoint& a, const DomainPoint& b) const override { return a[0] == b[0] ? 0 : 1; }

 private:
  std::size_t m_;
};

}  // namespace

EmbedderPtr hamming_scale_embed(std::size_t m, std::size_t s, std::uint64_t seed) {
  if (s < 1) throw InputError("scale must be at least 1");
  auto e = std::make_shared<CubeEmbedder>(m);
  e->scale = s;
  e->seed = seed;
  if (m > 0 && static_cast<double>(s) < 64.0 * std::log2(2.0 * static_cast<double>(m)))
    e->warnings.push_back("scale " + std::to_string(s) + " is small for m = " + std::to_string(m));
  return e;
}

BitString interval_string_embed(const Rational& r, std::size_t s, std::uint64_t seed) {
  check_unit(r);
  std::size_t t = ceil_mul(r, s);
  BitString out;
  out.append(random_string(s, derive_seed(seed, 0)), 0, t);
  out.append(random_string(s, derive_seed(seed, 1)), t, s - t);
  return out;
}

EmbedderPtr interval_string_embedder(std::size_t s, std::uint64_t seed) {
  auto e = std::make_shared<IntervalEmbedder>(false);
  e->scale = s;
  e->seed = seed;
  return e;
}

const Rational& golden_gamma() {
  static const Rational g = make_rational(956722026041LL, 1548008755920LL);
  return g;
}

bool discrepancy_within(std::size_t count, std::size_t s, const Rational& r) {
  Rational dev = Rational(static_cast<unsigned long>(count)) - r * static_cast<unsigned long>(s);
  if (dev < 0) dev = -dev;
  double bound = 3.0 + 2.45 * std::log2(static_cast<double>(s));
  double d = dev.get_d();
  if (std::fabs(d - bound) > 1e-6) return d <= bound;
  Interval exact_bound = Interval(Rational(3)) +
                         Interval(make_rational(49, 20)) * Interval::log2(Rational(static_cast<unsigned long>(s)));
  Interval dv(dev);
  if (dv.certainly_le(exact_bound)) return true;
  if (exact_bound.certainly_lt(dv)) return false;
  throw InconsistencyError("discrepancy bound comparison undecided at s = " + std::to_string(s));
}

std::vector<std::uint8_t> lowdisc_bits(const Rational& r, std::size_t s, const Rational& gamma,
                                       DiscrepancyRecord* record) {
  std::vector<std::uint8_t> bits(s);
  std::size_t count = 0;
  const bool small = gamma.get_num().fits_slong_p() && gamma.get_den().fits_slong_p() &&
                     r.get_num().fits_slong_p() && r.get_den().fits_slong_p() && gamma >= 0;
  if (small) {
    using u128 = unsigned __int128;
    const u128 p = static_cast<u128>(gamma.get_num().get_si()), q = static_cast<u128>(gamma.get_den().get_si());
    const long rn = r.get_num().get_si();
    const u128 rd = static_cast<u128>(r.get_den().get_si());
    for (std::size_t i = 1; i <= s; ++i) {
      u128 frac = (static_cast<u128>(i) * p) % q;
      bool b = rn >= 0 && frac * rd <= static_cast<u128>(rn) * q;
      bits[i - 1] = b;
      count += b;
    }
  } else {
    for (std::size_t i = 1; i <= s; ++i) {
      Rational u = gamma * static_cast<unsigned long>(i);
      mpz_class fl;
      mpz_fdiv_q(fl.get_mpz_t(), u.get_num_mpz_t(), u.get_den_mpz_t());
      u -= fl;
      bool b = u <= r;
      bits[i - 1] = b;
      count += b;
    }
  }
  if (record) {
    record->r = r;
    record->s = s;
    record->count = count;
    record->bound = 3.0 + 2.45 * std::log2(static_cast<double>(std::max<std::size_t>(s, 1)));
    record->within = s == 0 ? true : discrepancy_within(count, s, r);
  }
  return bits;
}

DiscrepancySweep discrepancy_sweep(const Rational& r, std::size_t s_max, const Rational& gamma) {
  std::vector<std::uint8_t> bits = lowdisc_bits(r, s_max, gamma);
  DiscrepancySweep out;
  out.worst_slack = std::numeric_limits<double>::infinity();
  const double rd = r.get_d();
  std::size_t count = 0;
  for (std::size_t s = 1; s <= s_max; ++s) {
    count += bits[s - 1];
    double slack = 3.0 + 2.45 * std::log2(static_cast<double>(s)) -
                   std::fabs(static_cast<double>(count) - static_cast<double>(s) * rd);
    if (slack < out.worst_slack) {
      out.worst_slack = slack;
      out.worst_s = s;
    }
    if (slack < 1e-6 && !out.first_violation && !discrepancy_within(count, s, r)) out.first_violation = s;
  }
  return out;
}

BitString interval_sequence_embed(const Rational& r, std::size_t s, std::uint64_t seed, const Rational& gamma) {
  check_unit(r);
  Rational rs = s == 0 ? Rational(0) : make_rational(static_cast<long>(ceil_mul(r, s)), static_cast<long>(s));
  std::vector<std::uint8_t> b = lowdisc_bits(rs, s, gamma);
  Bytes y = random_string(s, derive_seed(seed, 0)), z = random_string(s, derive_seed(seed, 1));
  BitString out;
  for (std::size_t i = 0; i < s; ++i) out.push(b[i] ? get_bit(z, i) : get_bit(y, i));
  return out;
}

EmbedderPtr interval_sequence_embedder(std::size_t s, std::uint64_t seed, const Rational& gamma) {
  auto e = std::make_shared<IntervalEmbedder>(true, gamma);
  e->scale = s;
  e->seed = seed;
  return e;
}

EmbedderPtr product_scale_embed(const std::vector<EmbedderPtr>& parts) {
  if (parts.empty()) throw InputError("product of zero embedders");
  std::set<std::uint64_t> seeds;
  for (const auto& p : parts) {
    if (p->scale != parts[0]->scale) throw InputError("product components must share the scale");
    if (!seeds.insert(p->seed).second) throw InputError("product components need distinct seeds");
  }
  auto e = std::make_shared<ProductEmbedder>(parts);
  e->scale = parts[0]->scale;
  std::uint64_t mix = 0;
  for (const auto& p : parts) mix = splitmix64(mix ^ p->seed);
  e->seed = mix;
  return e;
}

EmbedderPtr box_scale_embed(const std::vector<std::pair<Rational, Rational>>& bounds, std::size_t s,
                            std::uint64_t seed) {
  for (const auto& [a, b] : bounds)
    if (!(a < b)) throw InputError("box bounds need a < b, got [" + to_string(a) + ", " + to_string(b) + "]");
  auto e = std::make_shared<BoxEmbedder>(bounds);
  e->scale = s;
  e->seed = seed;
  return e;
}

EmbedderPtr simplex_scale_embed(std::size_t m, std::size_t s, std::uint64_t seed) {
  if (m < 2) throw InputError("simplex embedder needs at least 2 points");
  auto e = std::make_shared<SimplexEmbedder>(m);
  e->scale = s;
  e->seed = seed;
  return e;
}

double goodman_kruskal_gamma(const std::vector<double>& a, const std::vector<double>& b) {
  double conc = 0, disc = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double p = (a[i] - a[j]) * (b[i] - b[j]);
      if (p > 0) ++conc;
      if (p < 0) ++disc;
    }
  return conc + disc == 0 ? 0 : (conc - disc) / (conc + disc);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = 0.5 * static_cast<double>(i + j) + 1;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2) return 0;
  auto ra = average_ranks(a), rb = average_ranks(b);
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(ra.size());
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(rb.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return saa == 0 || sbb == 0 ? 0 : sab / std::sqrt(saa * sbb);
}

namespace {

ScaleReport rate(const std::vector<std::vector<Bytes>>& strings, const std::vector<std::size_t>& scales,
                 const std::function<Rational(std::size_t, std::size_t)>& target, const Codec& codec, double lo,
                 double hi, std::size_t workers) {
  ScaleReport rep;
  rep.band_lo = lo;
  rep.band_hi = hi;
  rep.codec = codec.name();
  for (std::size_t si = 0; si < scales.size(); ++si) {
    std::size_t n = strings[si].size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        RatioRow row;
        row.i = i;
        row.j = j;
        row.s = scales[si];
        row.target = target(i, j);
        rep.rows.push_back(row);
      }
  }
  std::vector<std::size_t> scale_index;
  for (std::size_t si = 0; si < scales.size(); ++si) {
    std::size_t n = strings[si].size();
    scale_index.insert(scale_index.end(), n * (n - 1) / 2, si);
  }
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < rep.rows.size(); k += stride) {
      RatioRow& row = rep.rows[k];
      const auto& strs = strings[scale_index[k]];
      row.d_hat = dk_estimate(strs[row.i], strs[row.j], codec).value;
    }
  };
  workers = std::max<std::size_t>(1, workers);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }

  std::vector<double> dh, dt;
  std::vector<double> sum_res(scales.size(), 0), cnt(scales.size(), 0);
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    RatioRow& row = rep.rows[k];
    if (row.target == 0) {
      row.excluded = true;
      if (row.d_hat != 0) rep.zero_pairs_ok = false;
      continue;
    }
    double sd = static_cast<double>(row.s) * row.target.get_d();
    row.ratio = row.d_hat / sd;
    ++rep.rated;
    if (row.ratio >= lo && row.ratio <= hi) ++rep.in_band;
    dh.push_back(row.d_hat);
    dt.push_back(sd);
    sum_res[scale_index[k]] += std::fabs(row.d_hat - sd);
    cnt[scale_index[k]] += 1;
  }
  rep.fraction_in_band = rep.rated ? static_cast<double>(rep.in_band) / static_cast<double>(rep.rated) : 0;
  rep.rank_correlation = goodman_kruskal_gamma(dh, dt);
  rep.spearman = spearman_rho(dh, dt);
  std::vector<double> xs, ys;
  for (std::size_t si = 0; si < scales.size(); ++si)
    if (cnt[si] > 0) {
      xs.push_back(std::log2(static_cast<double>(scales[si])));
      ys.push_back(sum_res[si] / cnt[si]);
    }
  if (xs.size() >= 2) {
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double num = 0, den = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      num += (xs[k] - mx) * (ys[k] - my);
      den += (xs[k] - mx) * (xs[k] - mx);
    }
    rep.residual_slope = den == 0 ? 0 : num / den;
  }
  return rep;
}

}  // namespace

ScaleReport verify_scale_embedding(const StringEmbedder& e, const std::vector<DomainPoint>& points,
                                   const std::vector<std::size_t>& scales, const Codec& codec, double lo, double hi,
                                   std::size_t workers, const TargetFn& target) {
  std::vector<std::vector<Bytes>> strings;
  for (std::size_t s : scales) {
    std::vector<Bytes> row;
    for (const auto& p : points) row.push_back(e.emit(p, s).bytes);
    strings.push_back(std::move(row));
  }
  auto tgt = [&](std::size_t i, std::size_t j) {
    return target ? target(points[i], points[j]) : e.target(points[i], points[j]);
  };
  return rate(strings, scales, tgt, codec, lo, hi, workers);
}

ScaleReport verify_strings(const std::vector<std::vector<Bytes>>& strings_per_scale,
                           const std::vector<std::size_t>& scales, const FiniteMetric& target, const Codec& codec,
                           double lo, double hi, std::size_t workers) {
  if (strings_per_scale.size() != scales.size()) throw InputError("one string list per scale is required");
  for (const auto& v : strings_per_scale)
    if (v.size() != target.n) throw InputError("string count does not match the target metric");
  return rate(strings_per_scale, scales, [&](std::size_t i, std::size_t j) { return target(i, j); }, codec, lo, hi,
              workers);
}

PackingReport packing_obstruction(const FiniteMetric& m, const Rational& eps, const Rational& r, double c, double b,
                                  std::size_t s_max) {
  if (!(eps > 0)) throw InputError("packing radius must be positive");
  PackingReport rep;
  rep.s_max = s_max;
  const Rational sep = 2 * eps;
  for (std::size_t i = 0; i < m.n; ++i) {
    bool ok = true;
    for (std::size_t c0 : rep.packing)
      if (m(i, c0) < sep) {
        ok = false;
        break;
      }
    if (ok) rep.packing.push_back(i);
  }
  for (std::size_t v : rep.packing) {
    std::size_t count = 0;
    for (std::size_t u : rep.packing) count += m(u, v) <= r;
    if (count > rep.max_ball) {
      rep.max_ball = count;
      rep.argmax = v;
    }
  }
  const double lb_count = std::log2(static_cast<double>(rep.max_ball));
  const double e = eps.get_d(), rr = r.get_d();
  for (std::size_t s = 1; s <= s_max; ++s) {
    double ls = std::log2(static_cast<double>(s));
    if (static_cast<double>(s) > c * ls / (2 * e) && lb_count > static_cast<double>(s) * rr + c * ls + b)
      rep.obstructed_scales.push_back(s);
  }
  return rep;
}

}  // namespace metriclab
