#pragma once

#include <mpfr.h>

#include <algorithm>
#include <utility>

namespace igw {

// Owning MPFR value with its own precision. Arithmetic results take the larger
// operand precision, so a computation started at p bits stays at p bits.
class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t bits = 128) { mpfr_init2(x_, bits); mpfr_set_zero(x_, 1); }
  BigFloat(double v, mpfr_prec_t bits) { mpfr_init2(x_, bits); mpfr_set_d(x_, v, MPFR_RNDN); }
  BigFloat(const BigFloat& o) { mpfr_init2(x_, o.precision()); mpfr_set(x_, o.x_, MPFR_RNDN); }
  BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(x_, mpfr_get_prec(o.x_));
    mpfr_swap(x_, o.x_);
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      mpfr_set_prec(x_, o.precision());
      mpfr_set(x_, o.x_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    mpfr_swap(x_, o.x_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(x_); }

  mpfr_prec_t precision() const { return mpfr_get_prec(x_); }
  double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(x_) != 0; }
  // log2 of |x|; very negative for zero.
  long exponent() const { return is_zero() ? -(1L << 30) : long(mpfr_get_exp(x_)); }

  mpfr_ptr get() { return x_; }
  mpfr_srcptr get() const { return x_; }

  BigFloat& operator+=(const BigFloat& o) { mpfr_add(x_, x_, o.x_, MPFR_RNDN); return *this; }
  BigFloat& operator-=(const BigFloat& o) { mpfr_sub(x_, x_, o.x_, MPFR_RNDN); return *this; }
  BigFloat& operator*=(const BigFloat& o) { mpfr_mul(x_, x_, o.x_, MPFR_RNDN); return *this; }
  BigFloat& operator/=(const BigFloat& o) { mpfr_div(x_, x_, o.x_, MPFR_RNDN); return *this; }
  BigFloat& operator*=(double d) { mpfr_mul_d(x_, x_, d, MPFR_RNDN); return *this; }
  BigFloat& operator/=(double d) { mpfr_div_d(x_, x_, d, MPFR_RNDN); return *this; }
  BigFloat& operator*=(long n) { mpfr_mul_si(x_, x_, n, MPFR_RNDN); return *this; }
  BigFloat& operator/=(long n) { mpfr_div_si(x_, x_, n, MPFR_RNDN); return *this; }

  friend BigFloat operator+(BigFloat a, const BigFloat& b) { return widen(a, b) += b; }
  friend BigFloat operator-(BigFloat a, const BigFloat& b) { return widen(a, b) -= b; }
  friend BigFloat operator*(BigFloat a, const BigFloat& b) { return widen(a, b) *= b; }
  friend BigFloat operator/(BigFloat a, const BigFloat& b) { return widen(a, b) /= b; }
  BigFloat operator-() const {
    BigFloat r(precision());
    mpfr_neg(r.x_, x_, MPFR_RNDN);
    return r;
  }

  friend int compare_abs(const BigFloat& a, const BigFloat& b) { return mpfr_cmpabs(a.x_, b.x_); }
  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.x_, b.x_); }

  friend BigFloat abs(const BigFloat& a) {
    BigFloat r(a.precision());
    mpfr_abs(r.x_, a.x_, MPFR_RNDN);
    return r;
  }
  friend BigFloat exp(const BigFloat& a) { return apply(a, mpfr_exp); }
  friend BigFloat log(const BigFloat& a) { return apply(a, mpfr_log); }
  friend BigFloat lgamma_of(const BigFloat& a) {
    BigFloat r(a.precision());
    int sign = 0;
    mpfr_lgamma(r.x_, &sign, a.x_, MPFR_RNDN);
    return r;
  }
  friend BigFloat pow(const BigFloat& a, const BigFloat& b) {
    BigFloat r(std::max(a.precision(), b.precision()));
    mpfr_pow(r.x_, a.x_, b.x_, MPFR_RNDN);
    return r;
  }

 private:
  static BigFloat& widen(BigFloat& a, const BigFloat& b) {
    if (b.precision() > a.precision()) mpfr_prec_round(a.x_, b.precision(), MPFR_RNDN);
    return a;
  }
  static BigFloat apply(const BigFloat& a, int (*f)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)) {
    BigFloat r(a.precision());
    f(r.x_, a.x_, MPFR_RNDN);
    return r;
  }

  mpfr_t x_;
};

}  // namespace igw
