#include "metriclab/interval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace metriclab {

namespace {

void set_rational(mpfr_t dst, const Rational& q, mpfr_rnd_t rnd) { mpfr_set_q(dst, q.get_mpq_t(), rnd); }

}  // namespace

Interval::Interval(unsigned precision) : precision_(precision) {
  mpfr_init2(lo_, precision_);
  mpfr_init2(hi_, precision_);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}

Interval::Interval(const Rational& value, unsigned precision) : precision_(precision) {
  mpfr_init2(lo_, precision_);
  mpfr_init2(hi_, precision_);
  set_rational(lo_, value, MPFR_RNDD);
  set_rational(hi_, value, MPFR_RNDU);
}

Interval::Interval(const Interval& other) : precision_(other.precision_) {
  mpfr_init2(lo_, precision_);
  mpfr_init2(hi_, precision_);
  mpfr_set(lo_, other.lo_, MPFR_RNDD);
  mpfr_set(hi_, other.hi_, MPFR_RNDU);
}

Interval::Interval(Interval&& other) noexcept : Interval(static_cast<const Interval&>(other)) {}

Interval& Interval::operator=(const Interval& other) {
  if (this == &other) return *this;
  if (precision_ != other.precision_) {
    precision_ = other.precision_;
    mpfr_set_prec(lo_, precision_);
    mpfr_set_prec(hi_, precision_);
  }
  mpfr_set(lo_, other.lo_, MPFR_RNDD);
  mpfr_set(hi_, other.hi_, MPFR_RNDU);
  return *this;
}

Interval& Interval::operator=(Interval&& other) noexcept {
  if (this != &other && precision_ == other.precision_) {
    mpfr_swap(lo_, other.lo_);
    mpfr_swap(hi_, other.hi_);
    return *this;
  }
  return *this = static_cast<const Interval&>(other);
}

Interval::~Interval() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

Interval Interval::from_double(double value, unsigned precision) {
  Interval r(precision);
  mpfr_set_d(r.lo_, value, MPFR_RNDD);
  mpfr_set_d(r.hi_, value, MPFR_RNDU);
  return r;
}

Interval Interval::power(const Rational& base, const Rational& exponent, unsigned precision) {
  if (base < 0) throw InputError("power of a negative base");
  if (exponent < 0) throw InputError("negative exponent");
  Interval r(precision);
  if (exponent == 0) {
    mpfr_set_ui(r.lo_, 1, MPFR_RNDD);
    mpfr_set_ui(r.hi_, 1, MPFR_RNDU);
    return r;
  }
  if (base == 0) return r;
  // x^e is monotone in both x and e, so evaluate at the matching corners with directed rounding.
  unsigned work = precision + 32;
  mpfr_t x, e_lo, e_hi;
  mpfr_inits2(work, x, e_lo, e_hi, static_cast<mpfr_ptr>(nullptr));
  set_rational(e_lo, exponent, MPFR_RNDD);
  set_rational(e_hi, exponent, MPFR_RNDU);
  bool grows = base >= 1;
  set_rational(x, base, MPFR_RNDD);
  mpfr_pow(r.lo_, x, grows ? e_lo : e_hi, MPFR_RNDD);
  set_rational(x, base, MPFR_RNDU);
  mpfr_pow(r.hi_, x, grows ? e_hi : e_lo, MPFR_RNDU);
  mpfr_clears(x, e_lo, e_hi, static_cast<mpfr_ptr>(nullptr));
  return r;
}

Interval Interval::log2(const Rational& x, unsigned precision) {
  if (x <= 0) throw InputError("log2 of a nonpositive value");
  Interval r(precision);
  mpfr_t t;
  mpfr_init2(t, precision + 32);
  set_rational(t, x, MPFR_RNDD);
  mpfr_log2(r.lo_, t, MPFR_RNDD);
  set_rational(t, x, MPFR_RNDU);
  mpfr_log2(r.hi_, t, MPFR_RNDU);
  mpfr_clear(t);
  return r;
}

double Interval::lower() const { return mpfr_get_d(lo_, MPFR_RNDD); }
double Interval::upper() const { return mpfr_get_d(hi_, MPFR_RNDU); }
double Interval::midpoint() const { return 0.5 * (mpfr_get_d(lo_, MPFR_RNDN) + mpfr_get_d(hi_, MPFR_RNDN)); }
double Interval::width() const {
  mpfr_t t;
  mpfr_init2(t, precision_);
  mpfr_sub(t, hi_, lo_, MPFR_RNDU);
  double w = mpfr_get_d(t, MPFR_RNDU);
  mpfr_clear(t);
  return w;
}

bool Interval::certainly_positive() const { return mpfr_sgn(lo_) > 0; }
bool Interval::certainly_negative() const { return mpfr_sgn(hi_) < 0; }
bool Interval::certainly_nonnegative() const { return mpfr_sgn(lo_) >= 0; }
bool Interval::certainly_nonpositive() const { return mpfr_sgn(hi_) <= 0; }
bool Interval::certainly_le(const Interval& other) const { return mpfr_lessequal_p(hi_, other.lo_); }
bool Interval::certainly_lt(const Interval& other) const { return mpfr_less_p(hi_, other.lo_); }

Interval Interval::operator-() const {
  Interval r(precision_);
  mpfr_neg(r.lo_, hi_, MPFR_RNDD);
  mpfr_neg(r.hi_, lo_, MPFR_RNDU);
  return r;
}

Interval& Interval::operator+=(const Interval& other) {
  mpfr_add(lo_, lo_, other.lo_, MPFR_RNDD);
  mpfr_add(hi_, hi_, other.hi_, MPFR_RNDU);
  return *this;
}

Interval& Interval::operator-=(const Interval& other) {
  mpfr_t t;
  mpfr_init2(t, precision_);
  mpfr_sub(t, lo_, other.hi_, MPFR_RNDD);
  mpfr_sub(hi_, hi_, other.lo_, MPFR_RNDU);
  mpfr_swap(lo_, t);
  mpfr_clear(t);
  return *this;
}

Interval& Interval::operator*=(const Interval& other) {
  mpfr_t c[4], u[4];
  const mpfr_t* a[2] = {&lo_, &hi_};
  const mpfr_t* b[2] = {&other.lo_, &other.hi_};
  for (int k = 0; k < 4; ++k) {
    mpfr_init2(c[k], precision_);
    mpfr_init2(u[k], precision_);
    mpfr_mul(c[k], *a[k / 2], *b[k % 2], MPFR_RNDD);
    mpfr_mul(u[k], *a[k / 2], *b[k % 2], MPFR_RNDU);
  }
  mpfr_set(lo_, c[0], MPFR_RNDD);
  mpfr_set(hi_, u[0], MPFR_RNDU);
  for (int k = 1; k < 4; ++k) {
    mpfr_min(lo_, lo_, c[k], MPFR_RNDD);
    mpfr_max(hi_, hi_, u[k], MPFR_RNDU);
  }
  for (int k = 0; k < 4; ++k) {
    mpfr_clear(c[k]);
    mpfr_clear(u[k]);
  }
  return *this;
}

Interval& Interval::operator/=(const Interval& other) {
  if (other.contains_zero()) throw InputError("interval division by an enclosure of zero");
  Interval inv(precision_);
  mpfr_ui_div(inv.lo_, 1, other.hi_, MPFR_RNDD);
  mpfr_ui_div(inv.hi_, 1, other.lo_, MPFR_RNDU);
  return *this *= inv;
}

std::string Interval::to_string(int digits) const {
  std::ostringstream os;
  os.precision(digits);
  os << "[" << lower() << ", " << upper() << "]";
  return os.str();
}

Interval operator+(Interval a, const Interval& b) { return a += b; }
Interval operator-(Interval a, const Interval& b) { return a -= b; }
Interval operator*(Interval a, const Interval& b) { return a *= b; }
Interval operator/(Interval a, const Interval& b) { return a /= b; }

double CertifiedReal::approx() const { return exact ? exact->get_d() : bounds.midpoint(); }

std::optional<int> CertifiedReal::sign() const {
  if (exact) return sgn(*exact);
  if (bounds.certainly_positive()) return 1;
  if (bounds.certainly_negative()) return -1;
  return std::nullopt;
}

std::string CertifiedReal::to_string() const {
  if (exact) return metriclab::to_string(*exact);
  std::ostringstream os;
  os.precision(17);
  os << bounds.midpoint();
  return os.str();
}

CertifiedReal operator+(const CertifiedReal& a, const CertifiedReal& b) {
  unsigned prec = std::max(a.bounds.precision(), b.bounds.precision());
  if (a.exact && b.exact) return CertifiedReal(Rational(*a.exact + *b.exact), prec);
  return CertifiedReal(a.bounds + b.bounds);
}

CertifiedReal operator-(const CertifiedReal& a, const CertifiedReal& b) {
  unsigned prec = std::max(a.bounds.precision(), b.bounds.precision());
  if (a.exact && b.exact) return CertifiedReal(Rational(*a.exact - *b.exact), prec);
  return CertifiedReal(a.bounds - b.bounds);
}

CertifiedReal operator*(const CertifiedReal& a, const CertifiedReal& b) {
  unsigned prec = std::max(a.bounds.precision(), b.bounds.precision());
  if (a.exact && b.exact) return CertifiedReal(Rational(*a.exact * *b.exact), prec);
  if ((a.exact && *a.exact == 0) || (b.exact && *b.exact == 0)) return CertifiedReal(Rational(0), prec);
  return CertifiedReal(a.bounds * b.bounds);
}

Interval Interval::max(const Interval& a, const Interval& b) {
  Interval r(std::max(a.precision_, b.precision_));
  mpfr_max(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
  mpfr_max(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
  return r;
}

CertifiedReal certified_max(const CertifiedReal& a, const CertifiedReal& b) {
  if (a.exact && b.exact) return *a.exact >= *b.exact ? a : b;
  if (b.bounds.certainly_le(a.bounds)) return a;
  if (a.bounds.certainly_le(b.bounds)) return b;
  return CertifiedReal(Interval::max(a.bounds, b.bounds));
}

CertifiedReal certified_power(const Rational& base, const Rational& exponent, unsigned precision) {
  if (base < 0) throw InputError("power of a negative base");
  if (exponent == 0) return CertifiedReal(Rational(1), precision);
  if (base == 0 || base == 1) return CertifiedReal(base, precision);
  if (exponent.get_num().fits_ulong_p() && exponent.get_num() <= 4096) {
    Rational powered;
    mpz_class num, den;
    unsigned long p = exponent.get_num().get_ui();
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), p);
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), p);
    powered = Rational(num, den);
    Rational root;
    if (exponent.get_den().fits_ulong_p() && exact_root(powered, exponent.get_den().get_ui(), root))
      return CertifiedReal(root, precision);
  }
  return CertifiedReal(Interval::power(base, exponent, precision));
}

std::optional<bool> certified_le(const CertifiedReal& a, const CertifiedReal& b) {
  if (a.exact && b.exact) return *a.exact <= *b.exact;
  if (a.bounds.certainly_le(b.bounds)) return true;
  if (b.bounds.certainly_lt(a.bounds)) return false;
  return std::nullopt;
}

}  // namespace metriclab
