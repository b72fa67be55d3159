#include "metriclab/rational.hpp"

#include <cctype>
#include <algorithm>
#include <cmath>

namespace metriclab {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) throw InputError("empty rational literal");

  bool negative = false;
  std::string_view body = s;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }

  Rational result;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto num = body.substr(0, slash);
    auto den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
      throw InputError("malformed rational literal '" + std::string(text) + "'");
    Integer n{std::string(num)}, d{std::string(den)};
    if (d == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    result = Rational(n, d);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto whole = body.substr(0, dot);
    auto frac = body.substr(dot + 1);
    if ((whole.empty() && frac.empty()) || (!whole.empty() && !all_digits(whole)) ||
        (!frac.empty() && !all_digits(frac)))
      throw InputError("malformed decimal literal '" + std::string(text) + "'");
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    Integer num{std::string(whole.empty() ? "0" : whole) + std::string(frac)};
    result = Rational(num, den);
  } else {
    if (!all_digits(body)) throw InputError("malformed rational literal '" + std::string(text) + "'");
    result = Rational(Integer(std::string(body)));
  }
  result.canonicalize();
  if (negative) result = -result;
  return result;
}

std::string to_string(const Rational& value) {
  Rational v = value;
  v.canonicalize();
  if (v.get_den() == 1) return v.get_num().get_str();
  return v.get_num().get_str() + "/" + v.get_den().get_str();
}

double to_double(const Rational& value) { return value.get_d(); }

Rational approximate_rational(double value, const Integer& max_den) {
  if (!std::isfinite(value)) throw InputError("cannot rationalize a non-finite value");
  // Continued-fraction convergents h/k of |value|.
  bool negative = value < 0;
  double x = std::fabs(value);
  Integer h_prev = 1, h = static_cast<long>(std::floor(x));
  Integer k_prev = 0, k = 1;
  double frac = x - std::floor(x);
  for (int iter = 0; iter < 64 && frac > 1e-18; ++iter) {
    double inv = 1.0 / frac;
    double a_d = std::floor(inv);
    if (a_d > 1e15) break;
    Integer a = static_cast<long>(a_d);
    Integer h_next = a * h + h_prev;
    Integer k_next = a * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    frac = inv - a_d;
  }
  Rational r(h, k);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

Rational rationalize(double value, double tol) {
  if (!std::isfinite(value)) throw InputError("cannot rationalize a non-finite value");
  const double target = std::fabs(value);
  const double budget = tol * std::max(1.0, target);
  Integer h_prev = 1, h = static_cast<long>(std::floor(target));
  Integer k_prev = 0, k = 1;
  double frac = target - std::floor(target);
  for (int iter = 0; iter < 64; ++iter) {
    Rational r(h, k);
    if (std::fabs(r.get_d() - target) <= budget || frac < 1e-300) break;
    double inv = 1.0 / frac;
    double a_d = std::floor(inv);
    if (a_d > 1e15) break;
    Integer a = static_cast<long>(a_d);
    Integer h_next = a * h + h_prev;
    Integer k_next = a * k + k_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    frac = inv - a_d;
  }
  Rational r(h, k);
  r.canonicalize();
  return value < 0 ? Rational(-r) : r;
}

RationalMatrix zero_matrix(std::size_t n) { return RationalMatrix(n, RationalVector(n, Rational(0))); }

bool exact_root(const Rational& value, unsigned long q, Rational& out) {
  if (value < 0) return false;
  if (q == 1) {
    out = value;
    return true;
  }
  Integer num_root, den_root;
  if (mpz_root(num_root.get_mpz_t(), value.get_num_mpz_t(), q) == 0) return false;
  if (mpz_root(den_root.get_mpz_t(), value.get_den_mpz_t(), q) == 0) return false;
  out = Rational(num_root, den_root);
  out.canonicalize();
  return true;
}

}  // namespace metriclab
