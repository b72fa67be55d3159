#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace metriclab {

using Rational = mpq_class;
using Integer = mpz_class;
using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;

/// Raised for malformed or out-of-contract caller input.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when two independent code paths disagree (a bug, never user error).
class InconsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Accepts "p/q", "-p/q", integers and finite decimals such as "0.05" or "-3.125".
Rational parse_rational(std::string_view text);

/// Canonical text form: "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& value);

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

double to_double(const Rational& value);

/// Best rational approximation with denominator <= max_den (continued fractions).
Rational approximate_rational(double value, const Integer& max_den);

/// First continued-fraction convergent within tol * max(1, |value|) of value.
Rational rationalize(double value, double tol);

RationalMatrix zero_matrix(std::size_t n);

inline bool is_integer(const Rational& r) { return r.get_den() == 1; }

/// Exact q-th root of a nonnegative rational, if it is rational.
bool exact_root(const Rational& value, unsigned long q, Rational& out);

}  // namespace metriclab
