#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace metriclab {

using Bytes = std::vector<std::uint8_t>;

Bytes concat(const Bytes& a, const Bytes& b);
std::string sha256_hex(const Bytes& data);

class Codec {
 public:
  virtual ~Codec() = default;
  virtual std::string name() const = 0;
  virtual Bytes compress(const Bytes& in) const = 0;
  /// Inverse of compress; codecs without a decoder throw.
  virtual Bytes decompress(const Bytes& in) const = 0;
  virtual bool has_decoder() const { return true; }
};

/// Bit-packed LZ77: 32-bit length header, Elias-gamma literal runs, greedy longest match
/// (earliest source on ties) over a 1 MiB window.
/// With xor_blocks, 32-byte aligned blocks may also be coded as the XOR of two earlier aligned blocks.
class Lz77Codec : public Codec {
 public:
  static constexpr std::size_t kWindow = std::size_t{1} << 20;
  static constexpr std::size_t kMinMatch = 6;
  static constexpr std::size_t kMaxCandidates = 4096;
  static constexpr std::size_t kBlock = 32;

  explicit Lz77Codec(bool xor_blocks = false) : xor_(xor_blocks) {}
  std::string name() const override { return xor_ ? "lz77x" : "lz77"; }
  Bytes compress(const Bytes& in) const override;
  Bytes decompress(const Bytes& in) const override;

 private:
  bool xor_;
};

/// Runs an external compressor: input on stdin, compressed bytes on stdout.
class ExternalCodec : public Codec {
 public:
  explicit ExternalCodec(std::string command) : command_(std::move(command)) {}
  std::string name() const override { return "external:" + command_; }
  Bytes compress(const Bytes& in) const override;
  Bytes decompress(const Bytes&) const override;
  bool has_decoder() const override { return false; }

 private:
  std::string command_;
};

/// "lz77", "lz77x", or "external" (command taken from METRICLAB_EXTERNAL_CODEC).
std::shared_ptr<const Codec> make_codec(const std::string& name);

inline constexpr const char* kExternalCodecEnv = "METRICLAB_EXTERNAL_CODEC";

/// Marker placed between the conditioning string and the target.
const Bytes& separator();

std::int64_t compress_len(const Bytes& x, const Codec& codec);

enum class Formula { Plain, Conditional, DkMax, DkAvg, Ncd };
const char* formula_name(Formula f);

struct ComplexityEstimate {
  double value = 0;       // bits
  std::int64_t raw = 0;   // unclamped difference for conditional estimates
  bool clamped = false;
  std::string codec;
  std::vector<std::string> digests;
  Formula formula = Formula::Plain;
};

/// C(y ++ SEP ++ x) - C(y), clamped at 0.
ComplexityEstimate cond_complexity(const Bytes& x, const Bytes& y, const Codec& codec);

enum class DkVariant { Max, Avg };
/// 0 when x == y; otherwise max or mean of the two conditional estimates, plus c.
ComplexityEstimate dk_estimate(const Bytes& x, const Bytes& y, const Codec& codec, DkVariant v = DkVariant::Max,
                               double c = 0);

/// Throws InputError when both compressed lengths are zero.
double ncd(const Bytes& x, const Bytes& y, const Codec& codec);

struct KraftReport {
  double sum = 0;          // sum over S of 2^-d(x, y)
  std::size_t count = 0;   // members with d <= r
  double r = 0;
  bool count_within = true;  // count <= 2^r
  std::vector<double> distances;
};

KraftReport kraft_ball_report(const Bytes& center, const std::vector<Bytes>& candidates, double r,
                              const Codec& codec);

/// len bits from a counter-mode stream, MSB first; trailing pad bits are zero.
Bytes random_string(std::size_t len_bits, std::uint64_t seed);

int get_bit(const Bytes& b, std::size_t i);
void set_bit(Bytes& b, std::size_t i, int v);

}  // namespace metriclab
