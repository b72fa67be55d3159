#pragma once

#include <mpfr.h>

#include <optional>
#include <string>
#include <vector>

#include "metriclab/rational.hpp"

namespace metriclab {

constexpr unsigned kDefaultPrecisionBits = 128;

/// Closed interval [lo, hi] with outward-rounded MPFR endpoints.
class Interval {
 public:
  explicit Interval(unsigned precision = kDefaultPrecisionBits);
  Interval(const Rational& value, unsigned precision = kDefaultPrecisionBits);
  Interval(const Interval& other);
  Interval(Interval&& other) noexcept;
  Interval& operator=(const Interval& other);
  Interval& operator=(Interval&& other) noexcept;
  ~Interval();

  static Interval from_double(double value, unsigned precision = kDefaultPrecisionBits);
  /// base^(p/q) for base >= 0 and exponent p/q >= 0.
  static Interval power(const Rational& base, const Rational& exponent,
                        unsigned precision = kDefaultPrecisionBits);
  /// log2(x) for rational x > 0.
  static Interval log2(const Rational& x, unsigned precision = kDefaultPrecisionBits);

  unsigned precision() const { return precision_; }
  double lower() const;
  double upper() const;
  double midpoint() const;
  double width() const;
  const mpfr_t& lo() const { return lo_; }
  const mpfr_t& hi() const { return hi_; }

  bool certainly_positive() const;
  bool certainly_negative() const;
  bool certainly_nonnegative() const;
  bool certainly_nonpositive() const;
  bool contains_zero() const { return !certainly_positive() && !certainly_negative(); }
  /// True iff every point of *this is <= every point of other.
  bool certainly_le(const Interval& other) const;
  bool certainly_lt(const Interval& other) const;

  Interval operator-() const;
  Interval& operator+=(const Interval& other);
  Interval& operator-=(const Interval& other);
  Interval& operator*=(const Interval& other);
  /// Throws InputError if other contains zero.
  Interval& operator/=(const Interval& other);

  std::string to_string(int digits = 20) const;

  /// Enclosure of max(x, y) for x in a, y in b.
  static Interval max(const Interval& a, const Interval& b);

 private:
  unsigned precision_;
  mpfr_t lo_;
  mpfr_t hi_;
};

Interval operator+(Interval a, const Interval& b);
Interval operator-(Interval a, const Interval& b);
Interval operator*(Interval a, const Interval& b);
Interval operator/(Interval a, const Interval& b);

/// A real number known exactly when rational, otherwise through a certified enclosure.
struct CertifiedReal {
  std::optional<Rational> exact;
  Interval bounds;

  CertifiedReal() : exact(Rational(0)), bounds(Rational(0)) {}
  CertifiedReal(const Rational& value, unsigned precision = kDefaultPrecisionBits)
      : exact(value), bounds(value, precision) {}
  explicit CertifiedReal(Interval enclosure) : exact(std::nullopt), bounds(std::move(enclosure)) {}

  bool is_exact() const { return exact.has_value(); }
  double approx() const;
  /// -1, 0, +1 when decidable; nullopt when the enclosure straddles zero.
  std::optional<int> sign() const;
  std::string to_string() const;
};

CertifiedReal operator+(const CertifiedReal& a, const CertifiedReal& b);
CertifiedReal operator-(const CertifiedReal& a, const CertifiedReal& b);
CertifiedReal operator*(const CertifiedReal& a, const CertifiedReal& b);

/// base^exponent, exact when the result is rational.
CertifiedReal certified_power(const Rational& base, const Rational& exponent,
                              unsigned precision = kDefaultPrecisionBits);

/// max(a, b); exact when both are.
CertifiedReal certified_max(const CertifiedReal& a, const CertifiedReal& b);

/// a <= b: decided exactly, by enclosure, or nullopt when undecidable at this precision.
std::optional<bool> certified_le(const CertifiedReal& a, const CertifiedReal& b);

using RealMatrix = std::vector<std::vector<CertifiedReal>>;

}  // namespace metriclab
