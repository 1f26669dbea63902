#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "igw/bigfloat.hpp"
#include "igw/offspring.hpp"
#include "igw/special.hpp"
#include "igw/tree.hpp"

namespace igw {

inline void check_rate(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::domain_error("lambda must be positive");
}

// ---------------------------------------------------------------- height

inline double height_cdf(double q, double lambda, double x) {
  check_igw_parameter(q);
  check_rate(lambda);
  if (!(x >= 0.0)) throw std::domain_error("height_cdf: x must be >= 0");
  return -std::expm1(-q / (1.0 - q) * std::log1p(lambda * (1.0 - q) * x));
}

inline double height_survival_pt(double q, double lambda, double t) {
  check_igw_parameter(q);
  check_rate(lambda);
  if (!(t >= 0.0)) throw std::domain_error("height_survival_pt: t must be >= 0");
  return std::pow(lambda * (1.0 - q) * t + 1.0, -q / (1.0 - q));
}

// Threshold t with height_survival_pt(q, lambda, t) = p.
inline double height_threshold_for(double q, double lambda, double p) {
  return (std::pow(p, -(1.0 - q) / q) - 1.0) / (lambda * (1.0 - q));
}

// ---------------------------------------------------------------- series policy

struct SeriesPolicy {
  mpfr_prec_t min_bits = 64;
  mpfr_prec_t max_bits = 16384;
  mpfr_prec_t fixed_bits = 0;  // nonzero: use exactly this precision
  std::size_t max_terms = 200000;
  int guard_bits = 20;
  bool fast_path = true;  // plain doubles when lambda q x <= 1
};

class SeriesGuardError : public std::runtime_error {
 public:
  SeriesGuardError(double max_term_log2, double sum_log2, long bits)
      : std::runtime_error("series cancellation guard violated: log2 max term " + std::to_string(max_term_log2) +
                           ", log2 |sum| " + std::to_string(sum_log2) + ", precision " + std::to_string(bits) +
                           " bits; raise the precision"),
        max_term_log2(max_term_log2),
        sum_log2(sum_log2),
        bits(bits) {}
  double max_term_log2, sum_log2;
  long bits;
};

// ---------------------------------------------------------------- length

// log of Gamma(n/q + 1) / Gamma(n/q - n + 2), i.e. of prod_{i=0}^{n-2} (n/q - i).
inline double log_falling_ratio(double q, long n) {
  return std::lgamma(n / q + 1.0) - std::lgamma(n / q - n + 2.0);
}

// Alternating series for the length law: L(x) = sum (-1)^{n-1} c_n y^n and
// l(x) = lambda q sum (-1)^{n-1} n c_n y^{n-1}, with y = lambda q x and
// c_n = Gamma(n/q+1) / (n!^2 Gamma(n/q-n+2)). Coefficients are built once for
// the largest argument; precision follows the size of the largest term.
class LengthSeries {
 public:
  LengthSeries(double q, double lambda, double x_max, SeriesPolicy policy = {})
      : q_(q), lambda_(lambda), policy_(policy) {
    check_igw_parameter(q);
    check_rate(lambda);
    if (!(x_max >= 0.0)) throw std::domain_error("length series: x must be >= 0");
    const double y = lambda * q * x_max;
    const double ly = y > 0.0 ? std::log(y) : -std::numeric_limits<double>::infinity();
    auto log_term = [&](long n) { return log_coef(n) + std::log(double(n)) + double(n) * ly; };
    double peak = log_term(1);
    long n = 1;
    while (true) {
      const double lt = log_term(++n);
      peak = std::max(peak, lt);
      if ((lt < peak - 60.0 && n > 8) || y == 0.0) break;
      if (std::size_t(n) > policy_.max_terms) throw std::runtime_error("length series: term limit reached");
    }
    // Result is at least ~min(y, 1)/100 for the CDF and comparable for the density.
    const double log_result = std::min(0.0, std::isfinite(ly) ? ly : 0.0) - std::log(100.0) -
                              (q + 1.0) * std::max(0.0, std::log(std::max(y, 1.0)));
    long bits = long(std::ceil((peak - log_result) / std::log(2.0))) + 64 + policy_.guard_bits;
    bits = std::max<long>(bits, policy_.min_bits);
    if (policy_.fixed_bits) bits = policy_.fixed_bits;
    if (bits > policy_.max_bits) throw SeriesGuardError(peak / std::log(2.0), log_result / std::log(2.0), bits);
    bits_ = mpfr_prec_t(bits);
    const double cutoff = peak - (double(bits_) + 16.0) * std::log(2.0);
    n = 1;
    while (!(n > 8 && log_term(n) < cutoff && log_term(n) < log_term(n - 1)) && y > 0.0) ++n;
    terms_ = std::max<long>(n, 2);
    fast_ = policy_.fast_path && !policy_.fixed_bits && y <= 1.0;
    if (fast_) return;
    const BigFloat qb(q, bits_);
    coef_.reserve(terms_);
    for (long k = 1; k <= terms_; ++k) {
      BigFloat nq(double(k), bits_);
      nq /= qb;
      BigFloat a = nq, b = nq;
      a += BigFloat(1.0, bits_);
      b += BigFloat(double(2 - k), bits_);
      BigFloat kk(double(k + 1), bits_);
      BigFloat l = lgamma_of(a) - lgamma_of(b) - lgamma_of(kk) - lgamma_of(kk);
      coef_.push_back(exp(l));
    }
  }

  double cdf(double x) const { return evaluate(x, false); }
  double pdf(double x) const { return evaluate(x, true); }
  long bits() const { return long(bits_); }
  long terms() const { return terms_; }

 private:
  double log_coef(long n) const { return log_falling_ratio(q_, n) - 2.0 * std::lgamma(n + 1.0); }

  double evaluate(double x, bool density) const {
    if (!(x >= 0.0)) throw std::domain_error("length series: x must be >= 0");
    const double lq = lambda_ * q_;
    if (x == 0.0) return density ? lq : 0.0;
    if (fast_ || (policy_.fast_path && !policy_.fixed_bits && lq * x <= 1.0)) return evaluate_double(x, density);
    if (coef_.empty()) throw std::logic_error("length series built for a smaller range");
    BigFloat y(x, bits_);
    y *= BigFloat(lambda_, bits_);
    y *= BigFloat(q_, bits_);
    BigFloat pw(1.0, bits_), sum(0.0, bits_);
    long max_exp = -(1L << 30);
    long prev_exp = max_exp;
    for (long n = 1; n <= terms_; ++n) {
      if (n > 1 || !density) pw *= y;
      BigFloat term = coef_[n - 1] * pw;
      if (density) term *= long(n);
      const long e = term.exponent();
      max_exp = std::max(max_exp, e);
      if (n % 2)
        sum += term;
      else
        sum -= term;
      if (n > 8 && e < prev_exp && e < sum.exponent() - long(bits_) - 8) break;
      prev_exp = e;
    }
    if (sum.is_zero() || max_exp - sum.exponent() > long(bits_) - policy_.guard_bits)
      throw SeriesGuardError(double(max_exp), double(sum.exponent()), long(bits_));
    double r = sum.to_double();
    return density ? r * lq : r;
  }

  double evaluate_double(double x, bool density) const {
    const double y = lambda_ * q_ * x, ly = std::log(y);
    double sum = 0.0;
    for (long n = 1; n < 400; ++n) {
      double t = std::exp(log_coef(n) + (density ? double(n - 1) : double(n)) * ly);
      if (density) t *= double(n);
      sum += n % 2 ? t : -t;
      if (n > 4 && t < 1e-18 * std::abs(sum)) break;
    }
    return density ? sum * lambda_ * q_ : sum;
  }

  double q_, lambda_;
  SeriesPolicy policy_;
  mpfr_prec_t bits_ = 64;
  long terms_ = 0;
  bool fast_ = false;
  std::vector<BigFloat> coef_;
};

inline double length_cdf(double q, double lambda, double x, SeriesPolicy policy = {}) {
  return LengthSeries(q, lambda, x, policy).cdf(x);
}

inline double length_pdf(double q, double lambda, double x, SeriesPolicy policy = {}) {
  return LengthSeries(q, lambda, x, policy).pdf(x);
}

// 1/((lambda q)^q Gamma(1-q)) x^{-q}; asymptotic only.
inline double length_tail(double q, double lambda, double x) {
  check_igw_parameter(q);
  check_rate(lambda);
  if (!(x > 0.0)) throw std::domain_error("length_tail: x must be > 0");
  return std::pow(x, -q) / (std::pow(lambda * q, q) * std::tgamma(1.0 - q));
}

// q = 1/2 closed forms through modified Bessel functions.
inline double length_pdf_bessel(double lambda, double x, mpfr_prec_t bits = 128) {
  check_rate(lambda);
  if (x == 0.0) return lambda / 2.0;
  BigFloat z(lambda * x, bits);
  BigFloat r = exp(-z) * bessel_i_series(1, z, bits);
  return r.to_double() / x;
}

inline double length_survival_bessel(double lambda, double x, mpfr_prec_t bits = 128) {
  check_rate(lambda);
  BigFloat z(lambda * x, bits);
  BigFloat r = exp(-z) * (bessel_i_series(0, z, bits) + bessel_i_series(1, z, bits));
  return r.to_double();
}

// CDF tabulated on [0, x_max] with points clustered near 0; linear interpolation.
class TabulatedCdf {
 public:
  TabulatedCdf(const std::function<std::vector<double>(const std::vector<double>&)>& eval, double x_max,
               std::size_t points) {
    if (points < 2 || !(x_max > 0.0)) throw std::invalid_argument("TabulatedCdf: bad grid");
    for (std::size_t i = 0; i < points; ++i) {
      const double s = double(i) / double(points - 1);
      x_.push_back(x_max * s * s);
    }
    f_ = eval(x_);
  }
  double operator()(double x) const {
    if (x <= 0.0) return f_.front();
    if (x >= x_.back()) return f_.back();
    const std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    const double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return f_[i - 1] + w * (f_[i] - f_[i - 1]);
  }
  double x_max() const { return x_.back(); }
  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& values() const { return f_; }

 private:
  std::vector<double> x_, f_;
};

inline TabulatedCdf length_cdf_table(double q, double lambda, double x_max, std::size_t points = 4000,
                                     SeriesPolicy policy = {}) {
  return TabulatedCdf(
      [&](const std::vector<double>& xs) {
        LengthSeries s(q, lambda, x_max, policy);
        std::vector<double> f;
        f.reserve(xs.size());
        for (double x : xs) f.push_back(s.cdf(x));
        return f;
      },
      x_max, points);
}

// ---------------------------------------------------------------- size

namespace detail {

// prod_{i=0}^{k-2} (k den - i num): the falling product scaled by num^{k-1}.
inline mpz_class falling_product_scaled(long num, long den, long k) {
  mpz_class p = 1;
  for (long i = 0; i <= k - 2; ++i) p *= mpz_class(k * den - i * num);
  return p;
}

inline mpz_class binomial(unsigned long n, unsigned long k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

inline mpz_class factorial(unsigned long n) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

// Gamma(k/q+1)/(k! Gamma(k/q-k+2)) q^k for q = num/den, exactly.
inline mpq_class size_weight(long num, long den, long k) {
  mpz_class denk;
  mpz_ui_pow_ui(denk.get_mpz_t(), (unsigned long)den, (unsigned long)k);
  mpq_class w(falling_product_scaled(num, den, k) * num, factorial((unsigned long)k) * denk);
  w.canonicalize();
  return w;
}

}  // namespace detail

inline void check_rational_q(long num, long den) {
  if (num <= 0 || den <= 0 || 2 * num < den || num >= den) throw std::domain_error("q must lie in [1/2, 1)");
}

// Exact edge-count pmf for rational q = num/den.
inline mpq_class size_pmf_exact(long num, long den, long n) {
  check_rational_q(num, den);
  if (n < 1) throw std::domain_error("size_pmf: n must be >= 1");
  mpq_class s = 0;
  for (long k = 1; k <= n; ++k) {
    mpq_class t = detail::size_weight(num, den, k) * mpq_class(detail::binomial(n - 1, k - 1));
    if (k % 2) s += t; else s -= t;
  }
  return s;
}

// Exact edge-count CDF at x >= 1 for rational q.
inline mpq_class size_cdf_exact(long num, long den, double x) {
  check_rational_q(num, den);
  if (!(x >= 1.0)) throw std::domain_error("size_cdf: x must be >= 1");
  const long m = long(std::floor(x));
  mpq_class s = 0;
  for (long k = 1; k <= m; ++k) {
    mpq_class t = detail::size_weight(num, den, k) * mpq_class(detail::binomial(m, k));
    if (k % 2) s += t; else s -= t;
  }
  return s;
}

namespace detail {

// sum_{k=1}^{m} (-1)^{k-1} binom(top, k - shift) w_k q^k in MPFR at a precision
// sized to the largest term.
inline double size_series_float(double q, long m, long top, long shift, const SeriesPolicy& policy) {
  check_igw_parameter(q);
  auto log_term = [&](long k) {
    return std::lgamma(top + 1.0) - std::lgamma(k - shift + 1.0) - std::lgamma(top - (k - shift) + 1.0) +
           log_falling_ratio(q, k) - std::lgamma(k + 1.0) + k * std::log(q);
  };
  double peak = -std::numeric_limits<double>::infinity();
  for (long k = 1; k <= m; ++k) peak = std::max(peak, log_term(k));
  // Results of interest are no smaller than ~ m^{-2}/100.
  const double log_result = -2.0 * std::log(double(m) + 1.0) - std::log(100.0);
  long bits = long(std::ceil((peak - log_result) / std::log(2.0))) + 64 + policy.guard_bits;
  bits = std::max<long>(bits, policy.min_bits);
  if (policy.fixed_bits) bits = policy.fixed_bits;
  if (bits > policy.max_bits) throw SeriesGuardError(peak / std::log(2.0), log_result / std::log(2.0), bits);
  const mpfr_prec_t b = mpfr_prec_t(bits);
  BigFloat qb(q, b), sum(0.0, b);
  long max_exp = -(1L << 30);
  for (long k = 1; k <= m; ++k) {
    BigFloat nq(double(k), b);
    nq /= qb;
    BigFloat w(1.0, b);
    for (long i = 0; i <= k - 2; ++i) {
      BigFloat f = nq;
      f -= BigFloat(double(i), b);
      w *= f;
    }
    BigFloat binom(0.0, b);
    mpfr_set_z(binom.get(), binomial((unsigned long)top, (unsigned long)(k - shift)).get_mpz_t(), MPFR_RNDN);
    BigFloat fact(0.0, b);
    mpfr_set_z(fact.get(), factorial((unsigned long)k).get_mpz_t(), MPFR_RNDN);
    BigFloat qk = qb;
    mpfr_pow_ui(qk.get(), qb.get(), (unsigned long)k, MPFR_RNDN);
    BigFloat term = w * binom * qk / fact;
    max_exp = std::max(max_exp, term.exponent());
    if (k % 2) sum += term; else sum -= term;
  }
  if (sum.is_zero() || max_exp - sum.exponent() > long(b) - policy.guard_bits) {
    if (!sum.is_zero() || max_exp > -long(b))
      throw SeriesGuardError(double(max_exp), double(sum.exponent()), long(b));
  }
  return sum.to_double();
}

}  // namespace detail

inline double size_pmf(double q, long n, SeriesPolicy policy = {}) {
  if (n < 1) throw std::domain_error("size_pmf: n must be >= 1");
  if (n == 2 || (q == 0.5 && n % 2 == 0)) return 0.0;  // no reduced planted tree has n edges
  return detail::size_series_float(q, n, n - 1, 1, policy);
}

inline double size_cdf(double q, double x, SeriesPolicy policy = {}) {
  if (!(x >= 1.0)) throw std::domain_error("size_cdf: x must be >= 1");
  const long m = long(std::floor(x));
  return detail::size_series_float(q, m, m, 0, policy);
}

inline double size_tail(double q, double x) {
  check_igw_parameter(q);
  if (!(x >= 1.0)) throw std::domain_error("size_tail: x must be >= 1");
  return std::pow(x, -q) / (std::pow(q, q) * std::tgamma(1.0 - q));
}

// Edge-count pmf alpha(1..n_max) of GW({q_k}) from A(z) = z Q(A(z)), i.e.
// alpha(n+1) = sum_k q_k [z^n] A^k. Index 0 of the result is unused (0).
template <class T>
std::vector<T> size_pmf_oracle(const std::vector<T>& q, std::size_t n_max) {
  std::vector<T> alpha(n_max + 1, T(0));
  // pw[k][n] = [z^n] A^k, filled column by column.
  std::vector<std::vector<T>> pw(n_max + 1, std::vector<T>(n_max + 1, T(0)));
  pw[0][0] = T(1);
  for (std::size_t n = 0; n < n_max; ++n) {
    if (n >= 1) {
      for (std::size_t k = 1; k <= n; ++k) {
        T s(0);
        for (std::size_t j = 1; j + (k - 1) <= n; ++j) s += alpha[j] * pw[k - 1][n - j];
        pw[k][n] = s;
      }
    }
    T next(0);
    for (std::size_t k = 0; k <= n && k < q.size(); ++k) next += q[k] * pw[k][n];
    alpha[n + 1] = next;
  }
  return alpha;
}

inline std::vector<mpq_class> igw_pmf_exact(long num, long den, std::size_t k_max) {
  check_rational_q(num, den);
  std::vector<mpq_class> q(k_max + 1, mpq_class(0));
  q[0] = mpq_class(num, den);
  q[0].canonicalize();
  if (k_max >= 2) {
    q[2] = mpq_class(den - num, 2 * num);
    q[2].canonicalize();
  }
  for (std::size_t k = 2; k + 1 <= k_max; ++k) {
    mpq_class r(long(k) * num - den, num * long(k + 1));
    r.canonicalize();
    q[k + 1] = q[k] * r;
  }
  return q;
}

// ---------------------------------------------------------------- Lagrange inversion

// Coefficients of W with z = W / (1 - W)^{1/q}: (-1)^{n-1} prod_{i=0}^{n-2} (n/q - i) / n!.
inline std::vector<double> lagrange_w_coeffs(double q, std::size_t n_terms) {
  check_igw_parameter(q);
  if (n_terms < 1) throw std::domain_error("lagrange_w_coeffs: need at least one term");
  std::vector<double> c(n_terms);
  for (std::size_t n = 1; n <= n_terms; ++n) {
    double v = 1.0;
    for (std::size_t i = 0; i + 2 <= n; ++i) v *= (double(n) / q - double(i)) / double(i + 2);
    c[n - 1] = n % 2 ? v : -v;
  }
  return c;
}

inline std::vector<mpq_class> lagrange_w_coeffs_exact(long num, long den, std::size_t n_terms) {
  check_rational_q(num, den);
  std::vector<mpq_class> c;
  for (std::size_t n = 1; n <= n_terms; ++n) {
    mpq_class v(detail::falling_product_scaled(num, den, long(n)));
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), (unsigned long)num, (unsigned long)(n - 1));
    v /= mpq_class(scale * detail::factorial(n));
    v.canonicalize();
    c.push_back(n % 2 ? v : mpq_class(-v));
  }
  return c;
}

// |f(W(z)) - z| for f(w) = w / (1 - w)^{1/q}, W summed from n_terms coefficients.
inline double lagrange_round_trip_residual(double q, double z, std::size_t n_terms = 200) {
  const auto c = lagrange_w_coeffs(q, n_terms);
  double w = 0.0;
  for (std::size_t n = c.size(); n-- > 0;) w = (w + c[n]) * z;
  return std::abs(w / std::pow(1.0 - w, 1.0 / q) - z);
}

// ---------------------------------------------------------------- pushforward

struct PushforwardLaw {
  double p = 1.0;                // survival probability of the thinning
  std::vector<double> g;         // g_0..g_M
  double tail_mass = 0.0;        // 1 - sum of g
  double rate_multiplier = 1.0;  // 1 - Q'(1 - p)

  double pmf(std::size_t m) const { return m < g.size() ? g[m] : 0.0; }
};

// Offspring law of the pruned tree when each child subtree survives with probability p.
inline PushforwardLaw pushforward_offspring(const OffspringDistribution& d, double p, int m_max = 64,
                                            double tol = 1e-10) {
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("pushforward: p must lie in (0, 1]");
  if (d.classify() == Criticality::supercritical) throw std::domain_error("pushforward: supercritical input");
  if (auto top = d.support_max()) m_max = int(std::max<std::size_t>(*top, 2));
  PushforwardLaw r;
  r.p = p;
  r.rate_multiplier = d.one_minus_Q_prime(1.0 - p);
  const double denom = p * r.rate_multiplier;
  const auto h = d.thinned_masses(p, m_max);
  r.g.assign(std::size_t(m_max) + 1, 0.0);
  r.g[0] = d.Q_minus_identity(1.0 - p) / denom;
  double sum = r.g[0];
  for (int m = 2; m <= m_max; ++m) {
    r.g[m] = h[m] / denom;
    if (r.g[m] < -tol) throw std::runtime_error("pushforward: negative probability");
    sum += r.g[m];
  }
  r.tail_mass = 1.0 - sum;
  if (r.tail_mass < -tol) throw std::runtime_error("pushforward: normalization defect " + std::to_string(-r.tail_mass));
  if (d.support_max() && std::abs(r.tail_mass) > tol)
    throw std::runtime_error("pushforward: normalization defect " + std::to_string(r.tail_mass));
  return r;
}

// G(z) = z + (Q(y) - y) / (p (1 - Q'(1-p))), y = 1 - p + p z.
inline double pushforward_Q(const OffspringDistribution& d, double p, double z) {
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("pushforward_Q: p must lie in (0, 1]");
  const double y = 1.0 - p + p * z;
  return z + d.Q_minus_identity(y) / (p * d.one_minus_Q_prime(1.0 - p));
}

// G'(1) = 1 - (1 - Q'(1)) / (1 - Q'(1 - p)).
inline double pushforward_G_prime_at_one(const OffspringDistribution& d, double p) {
  return 1.0 - d.one_minus_Q_prime(1.0) / d.one_minus_Q_prime(1.0 - p);
}

// ---------------------------------------------------------------- coloring

// g_p = P(C_p(T) != empty) = 1 - f with f = E[p^{#leaves}], the root of
// Q(f) - f = q_0 (1 - p); Q(x) - x decreases on [0, 1] for (sub)critical laws.
inline double coloring_survival(const OffspringDistribution& d, double p, double tol = 1e-12) {
  if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("coloring_survival: p must lie in [0, 1)");
  if (d.classify() == Criticality::supercritical) throw std::domain_error("coloring_survival: supercritical input");
  const double target = d.Q(0.0) * (1.0 - p);
  double lo = 0.0, hi = 1.0;  // Q(lo) - lo >= target >= Q(hi) - hi
  for (int it = 0; it < 200 && hi - lo > tol * 1e-2; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (d.Q_minus_identity(mid) >= target)
      lo = mid;
    else
      hi = mid;
  }
  if (hi - lo > tol) throw std::runtime_error("coloring_survival: no convergence");
  return 1.0 - 0.5 * (lo + hi);
}

enum class ColoringVariant { as_printed, thinned };

inline const char* to_string(ColoringVariant v) { return v == ColoringVariant::thinned ? "thinned" : "as-printed"; }

// G_p(z) = z + (Q(a + g z) - (1 - g) - g z) / (g (1 - Q'(1 - g))) with a = 1 - g
// (thinned) or a = 1 - p (as printed).
inline double coloring_Q(const OffspringDistribution& d, double p, double g, double z, ColoringVariant v) {
  if (!(g > 0.0 && g <= 1.0)) throw std::domain_error("coloring_Q: g_p must lie in (0, 1]");
  const double denom = g * d.one_minus_Q_prime(1.0 - g);
  if (v == ColoringVariant::thinned) return z + d.Q_minus_identity(1.0 - g + g * z) / denom;
  const double y = 1.0 - p + g * z;
  return z + (d.Q(y) - (1.0 - g) - g * z) / denom;
}

// Coefficients 0..m_max of the colored offspring generating function.
inline std::vector<double> coloring_offspring(const OffspringDistribution& d, double p, double g,
                                              ColoringVariant v, int m_max = 64) {
  if (v == ColoringVariant::thinned) {
    auto law = pushforward_offspring(d, g, m_max);
    return law.g;
  }
  // Taylor expansion of Q around 1 - p, scaled by g^m.
  if (auto top = d.support_max()) m_max = int(std::max<std::size_t>(*top, 2));
  const double denom = g * d.one_minus_Q_prime(1.0 - g);
  const auto h = d.thinned_masses(p, m_max);  // p^m / m! Q^{(m)}(1 - p)
  std::vector<double> c(std::size_t(m_max) + 1, 0.0);
  c[0] = (h[0] - (1.0 - g)) / denom;
  c[1] = 1.0 + (g / p * h[1] - g) / denom;
  for (int m = 2; m <= m_max; ++m) c[m] = std::pow(g / p, m) * h[m] / denom;
  return c;
}

// ---------------------------------------------------------------- attractors

// (Q(y) - y) / ((1 - x)(1 - Q'(x))) with y = z + (1 - z) x.
inline double attractor_limit(const OffspringDistribution& d, double z, double x) {
  if (!(z >= 0.0 && z < 1.0) || !(x > 0.0 && x < 1.0)) throw std::domain_error("attractor_limit: bad arguments");
  const double y = z + (1.0 - z) * x;
  return d.Q_minus_identity(y) / ((1.0 - x) * d.one_minus_Q_prime(x));
}

// (1 - z)^{2-L} / (2 - L) for critical laws, 1 - z for subcritical ones.
inline double attractor_target(const OffspringDistribution& d, double z) {
  if (!(z >= 0.0 && z < 1.0)) throw std::domain_error("attractor_target: z must lie in [0, 1)");
  if (d.classify() == Criticality::subcritical) return 1.0 - z;
  if (d.classify() == Criticality::supercritical) throw std::domain_error("attractor_target: supercritical input");
  const double L = estimate_L(d).value;
  return std::pow(1.0 - z, 2.0 - L) / (2.0 - L);
}

// Attractor parameter 1/(2 - L) of a critical law.
inline double attractor_q(const OffspringDistribution& d) { return 1.0 / (2.0 - estimate_L(d).value); }

// P(ord(T) <= n) for n = 0..n_max. A vertex has order <= n iff every child does and at most one
// child has order exactly n, so a_n = a + (Q(a) - a) / (1 - Q'(a)) with a = a_{n-1}.
inline std::vector<double> horton_order_cdf(const OffspringDistribution& d, int n_max) {
  if (n_max < 0) throw std::domain_error("horton_order_cdf: negative n_max");
  std::vector<double> a{0.0, d.Q(0.0)};
  for (int n = 2; n <= n_max; ++n) {
    const double x = a.back();
    a.push_back(x + d.Q_minus_identity(x) / d.one_minus_Q_prime(x));
  }
  return a;
}

// P(R^k(T) is a single edge | R^k(T) nonempty) = P(ord = k + 1 | ord > k).
inline double horton_single_edge_probability(const OffspringDistribution& d, int k) {
  if (k < 0) throw std::domain_error("horton_single_edge_probability: negative k");
  const auto a = horton_order_cdf(d, k + 1);
  return (a[k + 1] - a[k]) / (1.0 - a[k]);
}

// Probability of an unordered planted shape under GW({q_k}):
// product over vertices of q_k k! / prod(multiplicity!) of identical child shapes.
inline double gw_shape_probability(const CombinatorialTree& t, const std::function<double(long)>& pmf) {
  if (t.empty()) return 0.0;
  if (!t.is_planted()) throw std::invalid_argument("gw_shape_probability: planted tree expected");
  const auto code = subtree_codes(t);
  double prob = 1.0;
  for (Vertex v = 1; v < t.vertex_count(); ++v) {
    const std::uint32_t k = t.child_count(v);
    prob *= pmf(k);
    std::map<std::string, int> mult;
    for (std::uint32_t i = 0; i < k; ++i) ++mult[code[t.child(v, i)]];
    double arrangements = std::tgamma(k + 1.0);
    for (const auto& [c, m] : mult) arrangements /= std::tgamma(m + 1.0);
    prob *= arrangements;
  }
  return prob;
}

struct NamedShape {
  std::string name;
  CombinatorialTree tree;
};

// Single edge, cherry, and the two planted shapes with three leaves.
inline std::vector<NamedShape> small_shapes() {
  auto make = [](std::vector<Vertex> p) { return CombinatorialTree::from_parents(p); };
  return {
      {"single_edge", make({no_vertex, 0})},
      {"cherry", make({no_vertex, 0, 1, 1})},
      {"tripod", make({no_vertex, 0, 1, 1, 1})},
      {"leaf_cherry", make({no_vertex, 0, 1, 1, 3, 3})},
  };
}

}  // namespace igw
