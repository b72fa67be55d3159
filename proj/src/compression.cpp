#include "metriclab/compression.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string_view>
#include <unordered_map>

#include "metriclab/prng.hpp"
#include "metriclab/rational.hpp"

namespace metriclab {

Bytes concat(const Bytes& a, const Bytes& b) {
  Bytes out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::string sha256_hex(const Bytes& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw InconsistencyError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

namespace {

class BitWriter {
 public:
  void put(bool b) {
    if (used_ == 0) out_.push_back(0);
    if (b) out_.back() |= static_cast<std::uint8_t>(0x80u >> used_);
    used_ = (used_ + 1) & 7;
  }
  void put_bits(std::uint64_t v, int n) {
    for (int i = n - 1; i >= 0; --i) put((v >> i) & 1);
  }
  void put_byte(std::uint8_t b) {
    if (used_ == 0) {
      out_.push_back(b);
      return;
    }
    put_bits(b, 8);
  }
  // Elias gamma, n >= 1.
  void gamma(std::uint64_t n) {
    int bits = 64 - __builtin_clzll(n);
    for (int i = 1; i < bits; ++i) put(false);
    put_bits(n, bits);
  }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
  int used_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const Bytes& in) : in_(in) {}
  bool get() {
    if (pos_ >= in_.size() * 8) throw InputError("compressed stream is truncated");
    bool b = (in_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return b;
  }
  std::uint64_t get_bits(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | get();
    return v;
  }
  std::uint64_t gamma() {
    int zeros = 0;
    while (!get())
      if (++zeros > 63) throw InputError("malformed gamma code");
    std::uint64_t v = 1;
    for (int i = 0; i < zeros; ++i) v = (v << 1) | get();
    return v;
  }

 private:
  const Bytes& in_;
  std::size_t pos_ = 0;
};

constexpr std::size_t kHashBits = 16;

std::uint32_t hash4(const std::uint8_t* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return (v * 2654435761u) >> (32 - kHashBits);
}

struct XorRun {
  std::size_t count = 0;
  std::size_t d1 = 0, d2 = 0;  // back-distances in blocks
};

class BlockIndex {
 public:
  explicit BlockIndex(const Bytes& in) : in_(in) {}

  std::string_view block(std::size_t b) const {
    return {reinterpret_cast<const char*>(in_.data()) + b * Lz77Codec::kBlock, Lz77Codec::kBlock};
  }
  // Makes every block that ends at or before pos available as a reference.
  void advance(std::size_t pos) {
    while ((complete_ + 1) * Lz77Codec::kBlock <= pos) {
      seen_[std::string(block(complete_))].push_back(complete_);
      ++complete_;
    }
  }
  XorRun search(std::size_t pos) const {
    XorRun best;
    const std::size_t p = pos / Lz77Codec::kBlock;
    const std::size_t total = in_.size() / Lz77Codec::kBlock;
    std::string key(Lz77Codec::kBlock, '\0');
    std::size_t tries = 0;
    for (std::size_t j = complete_; j-- > 0 && tries < Lz77Codec::kMaxCandidates; ++tries) {
      auto target = block(p);
      auto other = block(j);
      for (std::size_t k = 0; k < Lz77Codec::kBlock; ++k) key[k] = static_cast<char>(target[k] ^ other[k]);
      auto it = seen_.find(key);
      if (it == seen_.end()) continue;
      for (auto ri = it->second.rbegin(); ri != it->second.rend(); ++ri) {
        std::size_t i = *ri;
        if (i == j) continue;
        std::size_t count = 1;
        while (p + count < total && matches(p + count, i + count, j + count)) ++count;
        if (count > best.count) best = {count, p - i, p - j};
        break;
      }
    }
    return best;
  }

 private:
  bool matches(std::size_t p, std::size_t i, std::size_t j) const {
    auto a = block(p), b = block(i), c = block(j);
    for (std::size_t k = 0; k < Lz77Codec::kBlock; ++k)
      if (static_cast<char>(b[k] ^ c[k]) != a[k]) return false;
    return true;
  }

  const Bytes& in_;
  std::size_t complete_ = 0;
  std::unordered_map<std::string, std::vector<std::size_t>> seen_;
};

}  // namespace

Bytes Lz77Codec::compress(const Bytes& in) const {
  const std::size_t n = in.size();
  if (n > 0xffffffffu) throw InputError(name() + ": input longer than 4 GiB");
  BitWriter w;
  w.put_bits(n, 32);

  std::vector<std::int64_t> head(std::size_t{1} << kHashBits, -1);
  std::vector<std::int64_t> prev(n, -1);
  auto insert = [&](std::size_t pos) {
    if (pos + 4 > n) return;
    std::uint32_t h = hash4(&in[pos]);
    prev[pos] = head[h];
    head[h] = static_cast<std::int64_t>(pos);
  };
  BlockIndex blocks(in);

  std::size_t pos = 0, lit_start = 0;
  auto flush_literals = [&](std::size_t upto) {
    w.gamma(upto - lit_start + 1);
    for (std::size_t k = lit_start; k < upto; ++k) w.put_byte(in[k]);
  };

  while (pos < n) {
    std::size_t best_len = 0, best_src = 0;
    if (pos + 4 <= n) {
      const std::size_t limit = n - pos;
      std::int64_t cand = head[hash4(&in[pos])];
      for (std::size_t tries = 0; cand >= 0 && tries < kMaxCandidates; ++tries) {
        std::size_t c = static_cast<std::size_t>(cand);
        if (pos - c > kWindow) break;
        std::size_t len = 0;
        while (len < limit && in[c + len] == in[pos + len]) ++len;
        if (len >= best_len) {
          best_len = len;
          best_src = c;
        }
        if (len == limit) break;
        cand = prev[c];
      }
    }
    XorRun xr;
    if (xor_ && pos % kBlock == 0 && pos + kBlock <= n && best_len < kBlock) {
      blocks.advance(pos);
      xr = blocks.search(pos);
    }

    std::size_t advance = 0;
    if (xr.count > 0) {
      flush_literals(pos);
      w.put(true);
      w.gamma(xr.count);
      w.gamma(xr.d1);
      w.gamma(xr.d2);
      advance = xr.count * kBlock;
    } else if (best_len >= kMinMatch) {
      flush_literals(pos);
      if (xor_) w.put(false);
      w.gamma(best_len - kMinMatch + 1);
      w.gamma(pos - best_src);
      advance = best_len;
    }
    if (advance == 0) {
      insert(pos);
      ++pos;
      continue;
    }
    for (std::size_t k = 0; k < advance; ++k) insert(pos + k);
    pos += advance;
    lit_start = pos;
  }
  if (lit_start < n) flush_literals(n);
  return w.take();
}

Bytes Lz77Codec::decompress(const Bytes& in) const {
  BitReader r(in);
  const std::size_t n = r.get_bits(32);
  Bytes out;
  out.reserve(n);
  while (out.size() < n) {
    std::uint64_t lits = r.gamma() - 1;
    if (lits > n - out.size()) throw InputError(name() + ": literal run overruns the output");
    for (std::uint64_t k = 0; k < lits; ++k) out.push_back(static_cast<std::uint8_t>(r.get_bits(8)));
    if (out.size() == n) break;
    if (xor_ && r.get()) {
      std::uint64_t count = r.gamma(), d1 = r.gamma(), d2 = r.gamma();
      std::size_t p = out.size() / kBlock;
      if (out.size() % kBlock != 0 || d1 > p || d2 > p || out.size() + count * kBlock > n)
        throw InputError(name() + ": bad block reference");
      for (std::uint64_t c = 0; c < count; ++c) {
        std::size_t a = (p + c - d1) * kBlock, b = (p + c - d2) * kBlock;
        for (std::size_t k = 0; k < kBlock; ++k) out.push_back(out[a + k] ^ out[b + k]);
      }
      continue;
    }
    std::uint64_t len = r.gamma() + kMinMatch - 1;
    std::uint64_t dist = r.gamma();
    if (dist > out.size() || len > n - out.size()) throw InputError(name() + ": bad match reference");
    std::size_t src = out.size() - dist;
    for (std::uint64_t k = 0; k < len; ++k) out.push_back(out[src + k]);
  }
  return out;
}

Bytes ExternalCodec::compress(const Bytes& in) const {
  char path[] = "/tmp/metriclab-codec-XXXXXX";
  int fd = mkstemp(path);
  if (fd < 0) throw InputError(name() + ": cannot create a temporary file");
  std::size_t off = 0;
  while (off < in.size()) {
    ssize_t k = ::write(fd, in.data() + off, in.size() - off);
    if (k <= 0) {
      ::close(fd);
      ::unlink(path);
      throw InputError(name() + ": cannot write the temporary file");
    }
    off += static_cast<std::size_t>(k);
  }
  ::close(fd);
  std::string cmd = command_ + " < '" + path + "'";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) {
    ::unlink(path);
    throw InputError(name() + ": cannot start the codec");
  }
  Bytes out;
  std::uint8_t buf[65536];
  std::size_t k;
  while ((k = std::fread(buf, 1, sizeof buf, p)) > 0) out.insert(out.end(), buf, buf + k);
  int status = ::pclose(p);
  ::unlink(path);
  if (status != 0) throw InputError(name() + ": codec exited with status " + std::to_string(status));
  return out;
}

Bytes ExternalCodec::decompress(const Bytes&) const {
  throw InputError(name() + ": no decoder available");
}

std::shared_ptr<const Codec> make_codec(const std::string& name) {
  if (name == "lz77") return std::make_shared<Lz77Codec>(false);
  if (name == "lz77x") return std::make_shared<Lz77Codec>(true);
  if (name == "external") {
    const char* cmd = std::getenv(kExternalCodecEnv);
    if (!cmd || !*cmd) throw InputError(std::string("codec 'external' needs ") + kExternalCodecEnv);
    return std::make_shared<ExternalCodec>(cmd);
  }
  throw InputError("unknown codec '" + name + "'");
}

const Bytes& separator() {
  static const Bytes sep(32, 0xA5);
  return sep;
}

std::int64_t compress_len(const Bytes& x, const Codec& codec) {
  return static_cast<std::int64_t>(codec.compress(x).size()) * 8;
}

const char* formula_name(Formula f) {
  switch (f) {
    case Formula::Plain: return "plain";
    case Formula::Conditional: return "conditional";
    case Formula::DkMax: return "dk_max";
    case Formula::DkAvg: return "dk_avg";
    case Formula::Ncd: return "ncd";
  }
  return "?";
}

ComplexityEstimate cond_complexity(const Bytes& x, const Bytes& y, const Codec& codec) {
  ComplexityEstimate e;
  e.formula = Formula::Conditional;
  e.codec = codec.name();
  e.digests = {sha256_hex(x), sha256_hex(y)};
  Bytes joint = concat(concat(y, separator()), x);
  e.raw = compress_len(joint, codec) - compress_len(y, codec);
  e.clamped = e.raw < 0;
  e.value = static_cast<double>(std::max<std::int64_t>(e.raw, 0));
  return e;
}

ComplexityEstimate dk_estimate(const Bytes& x, const Bytes& y, const Codec& codec, DkVariant v, double c) {
  ComplexityEstimate e;
  e.formula = v == DkVariant::Max ? Formula::DkMax : Formula::DkAvg;
  e.codec = codec.name();
  e.digests = {sha256_hex(x), sha256_hex(y)};
  if (x == y) return e;
  ComplexityEstimate a = cond_complexity(x, y, codec), b = cond_complexity(y, x, codec);
  e.clamped = a.clamped || b.clamped;
  e.value = (v == DkVariant::Max ? std::max(a.value, b.value) : 0.5 * (a.value + b.value)) + c;
  e.raw = static_cast<std::int64_t>(std::llround(e.value));
  return e;
}

double ncd(const Bytes& x, const Bytes& y, const Codec& codec) {
  double cx = static_cast<double>(compress_len(x, codec));
  double cy = static_cast<double>(compress_len(y, codec));
  double hi = std::max(cx, cy);
  if (hi == 0) throw InputError("ncd undefined: both compressed lengths are zero");
  double cxy = static_cast<double>(compress_len(concat(x, y), codec));
  return (cxy - std::min(cx, cy)) / hi;
}

KraftReport kraft_ball_report(const Bytes& center, const std::vector<Bytes>& candidates, double r,
                              const Codec& codec) {
  KraftReport rep;
  rep.r = r;
  for (const Bytes& x : candidates) {
    double d = dk_estimate(x, center, codec).value;
    rep.distances.push_back(d);
    rep.sum += std::exp2(-d);
    if (d <= r) ++rep.count;
  }
  rep.count_within = rep.count == 0 || std::log2(static_cast<double>(rep.count)) <= r;
  return rep;
}

Bytes random_string(std::size_t len_bits, std::uint64_t seed) {
  Bytes out((len_bits + 7) / 8);
  CounterRng rng(seed);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i % 8 == 0) word = rng.next();
    out[i] = static_cast<std::uint8_t>(word >> (8 * (i % 8)));
  }
  if (len_bits % 8) out.back() &= static_cast<std::uint8_t>(0xFF00u >> (len_bits % 8));
  return out;
}

int get_bit(const Bytes& b, std::size_t i) { return (b[i >> 3] >> (7 - (i & 7))) & 1; }

void set_bit(Bytes& b, std::size_t i, int v) {
  std::uint8_t mask = static_cast<std::uint8_t>(0x80u >> (i & 7));
  if (v)
    b[i >> 3] |= mask;
  else
    b[i >> 3] &= static_cast<std::uint8_t>(~mask);
}

}  // namespace metriclab
