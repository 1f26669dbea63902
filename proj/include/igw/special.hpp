#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "igw/bigfloat.hpp"

namespace igw {

inline double hurwitz_zeta(double s, double a) {
  gsl_sf_result r;
  const int status = gsl_sf_hzeta_e(s, a, &r);
  if (status != GSL_SUCCESS) throw std::domain_error(gsl_strerror(status));
  return r.val;
}

inline double riemann_zeta(double s) { return boost::math::zeta(s); }

namespace detail {

inline bool is_positive_integer(double s) { return s >= 1.0 && s == std::floor(s); }

inline double polylog_direct(double s, double x) {
  double sum = 0.0, xk = x;
  for (int k = 1; k < 100000; ++k) {
    const double term = xk * std::pow(double(k), -s);
    sum += term;
    if (term < 1e-18 * sum) break;
    xk *= x;
  }
  return sum;
}

}  // namespace detail

// Li_s(e^mu) minus the regular Taylor terms zeta(s-n) mu^n / n! with n < n0.
// The singular term (with a logarithm for positive integer s) is always kept.
// Valid for mu in (-2 pi, 0).
inline double polylog_remainder(double s, double mu, int n0) {
  if (!(mu < 0.0) || mu <= -2.0 * M_PI) throw std::domain_error("polylog_remainder: mu out of range");
  double sum = 0.0;
  const bool log_case = detail::is_positive_integer(s);
  if (log_case) {
    const int k = int(s);
    double h = 0.0, fact = 1.0;
    for (int i = 1; i < k; ++i) {
      h += 1.0 / i;
      fact *= i;
    }
    sum += std::pow(mu, k - 1) / fact * (h - std::log(-mu));
  } else {
    sum += std::tgamma(1.0 - s) * std::pow(-mu, s - 1.0);
  }
  double pw = 1.0;  // mu^n / n!
  for (int n = 0; n < 200; ++n) {
    if (n > 0) pw *= mu / n;
    if (n < n0) continue;
    if (log_case && n == int(s) - 1) continue;
    const double term = riemann_zeta(s - n) * pw;
    if (term == 0.0) continue;  // trivial zeros of zeta
    sum += term;
    if (n > n0 + 3 && std::abs(term) < 1e-19 * (std::abs(sum) + 1e-300)) break;
  }
  return sum;
}

// Li_s(x) for x in [0, 1).
inline double polylog(double s, double x) {
  if (!(x >= 0.0) || !(x < 1.0)) throw std::domain_error("polylog: x must lie in [0, 1)");
  if (x == 0.0) return 0.0;
  if (x <= 0.5) return detail::polylog_direct(s, x);
  return polylog_remainder(s, std::log(x), 0);
}

// Modified Bessel I_nu(x) for integer nu >= 0 by its power series at `bits` precision.
inline BigFloat bessel_i_series(int nu, const BigFloat& x, mpfr_prec_t bits) {
  BigFloat half_x = x;
  half_x /= 2L;
  BigFloat q = half_x * half_x;
  BigFloat term(1.0, bits);
  for (int i = 1; i <= nu; ++i) {
    term *= half_x;
    term /= long(i);
  }
  BigFloat sum = term;
  for (long k = 1;; ++k) {
    term *= q;
    term /= k;
    term /= k + nu;
    sum += term;
    if (term.is_zero() || term.exponent() < sum.exponent() - long(bits) - 8) break;
  }
  return sum;
}

}  // namespace igw
