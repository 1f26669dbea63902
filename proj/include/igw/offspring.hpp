#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "igw/special.hpp"

namespace igw {

enum class Family { igw, zipf, geometric, table };
enum class Criticality { subcritical, critical, supercritical };

inline const char* to_string(Criticality c) {
  switch (c) {
    case Criticality::subcritical: return "subcritical";
    case Criticality::critical: return "critical";
    default: return "supercritical";
  }
}

inline void check_igw_parameter(double q) {
  if (!(q >= 0.5 && q < 1.0)) throw std::domain_error("IGW parameter q must lie in [1/2, 1)");
}

// IGW(q) pmf via q_{k+1} = q_k (k - 1/q) / (k + 1), k >= 2.
inline double igw_pmf(double q, long k) {
  check_igw_parameter(q);
  if (k < 0) throw std::domain_error("igw_pmf: negative k");
  if (k == 0) return q;
  if (k == 1) return 0.0;
  double p = (1.0 - q) / (2.0 * q);
  const double a = 1.0 / q;
  for (long j = 2; j < k; ++j) p *= (double(j) - a) / double(j + 1);
  return p;
}

// Gamma-ratio form (1-q) Gamma(k - 1/q) / (q Gamma(2 - 1/q) k!), q in (1/2, 1), k >= 2.
inline double igw_pmf_gamma_form(double q, long k) {
  if (!(q > 0.5 && q < 1.0)) throw std::domain_error("gamma form needs q in (1/2, 1)");
  if (k < 2) return k == 0 ? q : 0.0;
  const double a = 1.0 / q;
  return (1.0 - q) / q * std::exp(std::lgamma(k - a) - std::lgamma(2.0 - a) - std::lgamma(k + 1.0));
}

struct RegularityProfile {
  std::vector<double> probes;     // x (for L) or k (for Lambda)
  std::vector<double> estimates;  // estimate at each probe
  double value = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

class OffspringDistribution {
 public:
  static OffspringDistribution igw(double q) {
    check_igw_parameter(q);
    OffspringDistribution d(Family::igw);
    d.param_ = q;
    d.q0_ = q;
    d.mean_ = 1.0;
    d.name_ = "igw:" + short_number(q);
    d.build_cache();
    return d;
  }

  // IGW(num/den) keeping the exact rational parameter for exact size laws.
  static OffspringDistribution igw_rational(long num, long den) {
    if (den <= 0 || num <= 0) throw std::domain_error("igw: bad rational parameter");
    auto d = igw(double(num) / double(den));
    const long g = std::gcd(num, den);
    d.rational_ = std::make_pair(num / g, den / g);
    d.name_ = "igw:" + std::to_string(num / g) + "/" + std::to_string(den / g);
    return d;
  }

  static OffspringDistribution critical_binary() {
    auto d = igw_rational(1, 2);
    d.name_ = "binary";
    return d;
  }

  // q_k = c k^{-(alpha+1)} (k >= 2), c = 1/(zeta(alpha) - 1), q_0 = 1 - c (zeta(alpha+1) - 1).
  static OffspringDistribution zipf_critical(double alpha) {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw std::domain_error("zipf alpha must lie in (1, 2]");
    OffspringDistribution d(Family::zipf);
    d.param_ = alpha;
    d.c_ = 1.0 / (riemann_zeta(alpha) - 1.0);
    d.q0_ = 1.0 - d.c_ * (riemann_zeta(alpha + 1.0) - 1.0);
    if (!(d.q0_ > 0.0 && d.q0_ < 1.0)) throw std::domain_error("zipf construction infeasible");
    d.mean_ = 1.0;
    d.name_ = "zipf:" + short_number(alpha);
    d.build_cache();
    return d;
  }

  // q_0 = 1/(2-r), q_k = (1-q_0)(1-r) r^{k-2} for k >= 2; critical for r in (0,1).
  static OffspringDistribution geometric_critical(double r = 0.5) {
    if (!(r > 0.0 && r < 1.0)) throw std::domain_error("geometric ratio must lie in (0, 1)");
    OffspringDistribution d(Family::geometric);
    d.param_ = r;
    d.q0_ = 1.0 / (2.0 - r);
    d.c_ = (1.0 - d.q0_) * (1.0 - r);
    d.mean_ = 1.0;
    d.name_ = r == 0.5 ? "geometric" : "geometric:" + short_number(r);
    d.build_cache();
    return d;
  }

  static OffspringDistribution table(std::vector<double> q) {
    if (q.empty()) throw std::invalid_argument("table pmf is empty");
    double s = 0.0, m = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (!(q[k] >= 0.0) || !std::isfinite(q[k])) throw std::invalid_argument("table pmf has a negative entry");
      s += q[k];
      m += double(k) * q[k];
    }
    if (q.size() > 1 && q[1] != 0.0) throw std::invalid_argument("table pmf must have q_1 = 0");
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("table pmf does not sum to 1");
    while (q.size() > 1 && q.back() == 0.0) q.pop_back();
    OffspringDistribution d(Family::table);
    d.q0_ = q[0];
    d.mean_ = m;
    d.pmf_ = std::move(q);
    std::ostringstream os;
    os << "table:[";
    for (std::size_t k = 0; k < d.pmf_.size(); ++k) os << (k ? "," : "") << short_number(d.pmf_[k]);
    os << "]";
    d.name_ = os.str();
    d.build_cache();
    return d;
  }

  static OffspringDistribution from_json(const nlohmann::json& j) {
    return table(j.at("q").get<std::vector<double>>());
  }

  static OffspringDistribution from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open distribution file " + path);
    return from_json(nlohmann::json::parse(in));
  }

  // "igw:0.5", "igw:2/3", "binary", "zipf:1.5", "geometric[:r]", "table:<path>", "table:[..]".
  static OffspringDistribution parse(std::string_view spec) {
    const auto colon = spec.find(':');
    const std::string head(spec.substr(0, colon));
    const std::string arg(colon == std::string_view::npos ? "" : spec.substr(colon + 1));
    if (head == "binary" || head == "critical-binary") return critical_binary();
    if (head == "geometric" || head == "geometric-critical")
      return geometric_critical(arg.empty() ? 0.5 : std::stod(arg));
    if (arg.empty()) throw std::invalid_argument("distribution needs a parameter: " + std::string(spec));
    if (head == "igw") {
      const auto slash = arg.find('/');
      if (slash != std::string::npos) return igw_rational(std::stol(arg.substr(0, slash)), std::stol(arg.substr(slash + 1)));
      return igw(std::stod(arg));
    }
    if (head == "zipf") return zipf_critical(std::stod(arg));
    if (head == "table") {
      if (arg.front() == '[') return table(nlohmann::json::parse(arg).get<std::vector<double>>());
      return from_json_file(arg);
    }
    throw std::invalid_argument("unknown distribution: " + std::string(spec));
  }

  Family family() const { return family_; }
  double parameter() const { return param_; }
  const std::string& name() const { return name_; }
  std::optional<std::pair<long, long>> rational_parameter() const { return rational_; }
  double mean() const { return mean_; }
  double zipf_constant() const { return c_; }

  Criticality classify() const {
    if (std::abs(mean_ - 1.0) <= 1e-9) return Criticality::critical;
    return mean_ < 1.0 ? Criticality::subcritical : Criticality::supercritical;
  }
  bool is_critical() const { return classify() == Criticality::critical; }

  std::optional<std::size_t> support_max() const {
    if (family_ == Family::table) return pmf_.size() - 1;
    return std::nullopt;
  }

  bool finite_second_moment() const {
    switch (family_) {
      case Family::igw: return param_ == 0.5;
      case Family::zipf: return false;
      default: return true;
    }
  }

  double pmf(long k) const {
    if (k < 0) return 0.0;
    if (std::size_t(k) < pmf_.size()) return pmf_[k];
    switch (family_) {
      case Family::table: return 0.0;
      case Family::zipf: return k < 2 ? (k == 0 ? q0_ : 0.0) : c_ * std::pow(double(k), -param_ - 1.0);
      case Family::geometric: return k < 2 ? (k == 0 ? q0_ : 0.0) : c_ * std::pow(param_, double(k - 2));
      case Family::igw: {
        if (param_ == 0.5) return 0.0;
        double p = pmf_.back();
        const double a = 1.0 / param_;
        for (long j = long(pmf_.size()) - 1; j < k; ++j) p *= (double(j) - a) / double(j + 1);
        return p;
      }
    }
    return 0.0;
  }

  // Draw by inverse CDF. Returns cap + 1 when the draw would exceed cap.
  long sample(double u, long cap = std::numeric_limits<long>::max()) const {
    if (u < cdf_.back()) {
      const long k = long(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
      return k > cap ? cap + 1 : k;
    }
    if (family_ == Family::table) return std::min<long>(long(pmf_.size()) - 1, cap + 1);
    long k = long(cdf_.size()) - 1;
    double acc = cdf_.back();
    double p = pmf_.back();
    const double a = 1.0 / param_;
    while (true) {
      if (k >= cap) return cap + 1;
      switch (family_) {
        case Family::igw: p *= (double(k) - a) / double(k + 1); break;
        case Family::zipf: p = c_ * std::pow(double(k + 1), -param_ - 1.0); break;
        case Family::geometric: p *= param_; break;
        default: break;
      }
      ++k;
      acc += p;
      if (u < acc || p == 0.0) return k;
    }
  }

  double Q(double z) const {
    if (family_ == Family::table) return poly(z, 0);
    check_unit(z);
    switch (family_) {
      case Family::igw: return z + param_ * std::pow(1.0 - z, 1.0 / param_);
      case Family::zipf:
        if (z <= 0.5) return q0_ + c_ * (polylog(param_ + 1.0, z) - z);
        return z + Q_minus_identity(z);
      case Family::geometric: return q0_ + c_ * z * z / (1.0 - param_ * z);
      default: return 0.0;
    }
  }

  // Q(x) - x, accurate as x -> 1.
  double Q_minus_identity(double x) const {
    check_unit(x);
    const double u = 1.0 - x;
    switch (family_) {
      case Family::igw: return param_ * std::pow(u, 1.0 / param_);
      case Family::zipf: {
        if (x == 1.0) return 0.0;
        if (x <= 0.5) return Q(x) - x;
        const double mu = std::log(x);
        return (1.0 + c_) * log_plus_u(u) + c_ * polylog_remainder(param_ + 1.0, mu, 2);
      }
      case Family::geometric: return q0_ * u * u / (1.0 - param_ * x);
      case Family::table: return (1.0 - mean_) * u + u * u * tail_series(x);
    }
    return 0.0;
  }

  // 1 - Q'(x), accurate as x -> 1.
  double one_minus_Q_prime(double x) const {
    check_unit(x);
    const double u = 1.0 - x;
    switch (family_) {
      case Family::igw: return std::pow(u, 1.0 / param_ - 1.0);
      case Family::zipf: {
        if (x == 1.0) return 0.0;
        if (x == 0.0) return 1.0;
        if (x <= 0.5) return 1.0 - c_ * (polylog(param_, x) / x - 1.0);
        const double mu = std::log(x);
        return (-(1.0 + c_) * u - c_ * polylog_remainder(param_, mu, 1)) / x;
      }
      case Family::geometric: {
        const double den = 1.0 - param_ * x;
        const double g = q0_ / den, gp = q0_ * param_ / (den * den);
        return 2.0 * u * g - u * u * gp;
      }
      case Family::table: {
        double s = 1.0 - mean_;
        for (std::size_t k = 2; k < pmf_.size(); ++k)
          s += double(k) * pmf_[k] * -std::expm1(double(k - 1) * std::log(x));
        return s;
      }
    }
    return 0.0;
  }

  double Q_derivative(double z, int m) const {
    if (m < 0) throw std::domain_error("negative derivative order");
    if (m == 0) return Q(z);
    if (family_ == Family::table) return poly(z, m);
    if (m == 1) return 1.0 - one_minus_Q_prime(z);
    check_unit(z);
    switch (family_) {
      case Family::igw: {
        const double a = 1.0 / param_;
        double coef = param_;
        for (int i = 0; i < m; ++i) coef *= -(a - i);
        if (coef == 0.0) return 0.0;
        if (z == 1.0) return a - m == 0.0 ? coef : std::numeric_limits<double>::infinity();
        return coef * std::pow(1.0 - z, a - m);
      }
      case Family::geometric: {
        double f = 1.0;
        for (int i = 1; i <= m; ++i) f *= i * param_;
        return c_ / (param_ * param_) * f * std::pow(1.0 - param_ * z, -m - 1.0);
      }
      case Family::zipf: {
        if (z == 1.0) return std::numeric_limits<double>::infinity();
        double sum = 0.0;
        for (long k = std::max(2, m);; ++k) {
          double fall = 1.0;
          for (int i = 0; i < m; ++i) fall *= double(k - i);
          const double term = fall * c_ * std::pow(double(k), -param_ - 1.0) * std::pow(z, double(k - m));
          sum += term;
          const double ratio = double(k + 1) / double(k + 1 - m) * z;
          if (k > m + 8 && ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-16 * sum) break;
          if (term == 0.0 && k > m) break;
        }
        return sum;
      }
      default: return 0.0;
    }
  }

  // g(x) = (Q(x) - x) / (1 - x)^2.
  double g(double x) const {
    if (!(x < 1.0)) throw std::domain_error("g: x must be < 1");
    if (family_ == Family::igw) return param_ * std::pow(1.0 - x, 1.0 / param_ - 2.0);
    const double u = 1.0 - x;
    return Q_minus_identity(x) / (u * u);
  }

  // (1 - m)/(1 - x) + sum_j x^j E[(X - j - 1)_+]; reduces to the plain series when critical.
  double g_series(double x) const {
    if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("g_series: x must lie in [0, 1)");
    return (1.0 - mean_) / (1.0 - x) + tail_series(x);
  }

  // P(X >= k) and E[X 1{X >= k}] for k >= 2.
  double tail_probability(long k) const {
    switch (family_) {
      case Family::igw: {
        const double a = 1.0 / param_;
        if (param_ == 0.5) return k <= 2 ? 0.5 : 0.0;
        return param_ * std::exp(std::lgamma(k - a) - std::lgamma(1.0 - a) - std::lgamma(double(k)));
      }
      case Family::zipf: return c_ * hurwitz_zeta(param_ + 1.0, double(k));
      case Family::geometric: return c_ * std::pow(param_, double(k - 2)) / (1.0 - param_);
      case Family::table: {
        double s = 0.0;
        for (std::size_t j = std::size_t(k); j < pmf_.size(); ++j) s += pmf_[j];
        return s;
      }
    }
    return 0.0;
  }

  double tail_mean(long k) const {
    switch (family_) {
      case Family::igw: {
        const double a = 1.0 / param_;
        if (param_ == 0.5) return k <= 2 ? 1.0 : 0.0;
        return std::exp(std::lgamma(k - a) - std::lgamma(2.0 - a) - std::lgamma(double(k - 1)));
      }
      case Family::zipf: return c_ * hurwitz_zeta(param_, double(k));
      case Family::geometric: {
        const double r = param_;
        const double rk = std::pow(r, double(k - 2));
        return c_ * rk * (double(k) / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
      }
      case Family::table: {
        double s = 0.0;
        for (std::size_t j = std::size_t(k); j < pmf_.size(); ++j) s += double(j) * pmf_[j];
        return s;
      }
    }
    return 0.0;
  }

  // h_m = p^m/m! Q^{(m)}(1 - p) = sum_k q_k Binom(k, p)(m), for m = 0..m_max.
  std::vector<double> thinned_masses(double p, int m_max) const {
    if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("thinned_masses: p must lie in (0, 1]");
    std::vector<double> h(std::size_t(m_max) + 1, 0.0);
    const double x = 1.0 - p;
    h[0] = Q(x);
    if (m_max >= 1) h[1] = p * (1.0 - one_minus_Q_prime(x));
    if (m_max < 2) return h;
    switch (family_) {
      case Family::igw: {
        const double s = std::pow(p, 1.0 / param_);
        for (int m = 2; m <= m_max; ++m) h[m] = s * pmf(m);
        return h;
      }
      case Family::geometric: {
        const double r = param_, base = 1.0 - r + r * p;
        for (int m = 2; m <= m_max; ++m)
          h[m] = c_ / (r * r) * std::pow(r * p, double(m)) * std::pow(base, -m - 1.0);
        return h;
      }
      default: break;
    }
    // Binomial thinning summed over k; beyond k_end the Binomial(k, p) mass at
    // m <= m_max is below exp(-50).
    long k_end;
    if (family_ == Family::table) {
      k_end = long(pmf_.size()) - 1;
    } else {
      const double need = m_max + 50.0 + 12.0 * std::sqrt(m_max + 50.0);
      k_end = std::max<long>(1000, long(std::ceil(need / p)));
    }
    const double lq = std::log1p(-p);
    const double odds = p < 1.0 ? p / (1.0 - p) : 0.0;
    for (long k = 2; k <= k_end; ++k) {
      const double qk = pmf(k);
      if (qk == 0.0) continue;
      if (p == 1.0) {
        if (k <= m_max) h[k] += qk;
        continue;
      }
      double b = std::exp(double(k) * lq);
      const int top = int(std::min<long>(k, m_max));
      for (int m = 0; m < top; ++m) {
        b *= double(k - m) / double(m + 1) * odds;
        if (m + 1 >= 2) h[m + 1] += qk * b;
      }
    }
    return h;
  }

 private:
  explicit OffspringDistribution(Family f) : family_(f) {}

  static std::string short_number(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
  }

  static void check_unit(double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("generating function argument outside [0, 1]");
  }

  // log(x) + (1 - x) with x = 1 - u, without cancellation for small u.
  static double log_plus_u(double u) {
    if (u > 0.01) return std::log1p(-u) + u;
    double s = 0.0, un = u;
    for (int n = 2; n < 40; ++n) {
      un *= u;
      s -= un / n;
    }
    return s;
  }

  // sum_j x^j E[(X - j - 1)_+].
  double tail_series(double x) const {
    if (family_ == Family::table) {
      double s = 0.0, xj = 1.0;
      for (std::size_t j = 0; j + 2 < pmf_.size(); ++j) {
        double t = 0.0;
        for (std::size_t k = j + 2; k < pmf_.size(); ++k) t += double(k - j - 1) * pmf_[k];
        s += xj * t;
        xj *= x;
      }
      return s;
    }
    // E[(X - j)_+] = mean - j + R_j with R_{j+1} = R_j + P(X <= j).
    double s = 0.0, xj = 1.0, r = 0.0, cdf = 0.0, pk = 0.0;
    for (long j = 0;; ++j) {
      pk = next_pmf(j, pk);
      cdf += pk;
      r += cdf;
      // r now equals R_{j+1}.
      const double t = std::max(0.0, mean_ - double(j + 1) + r);
      s += xj * t;
      xj *= x;
      if (xj / (1.0 - x) < 1e-17 * s || xj == 0.0) break;
      if (j > 50'000'000) throw std::runtime_error("g_series: truncation bound unachievable");
    }
    return s;
  }

  // q_k given q_{k-1}; O(1) for the recurrent families.
  double next_pmf(long k, double prev) const {
    if (std::size_t(k) < pmf_.size()) return pmf_[k];
    switch (family_) {
      case Family::igw: return prev * (double(k - 1) - 1.0 / param_) / double(k);
      case Family::geometric: return prev * param_;
      default: return pmf(k);
    }
  }

  // m-th derivative of a finite polynomial pmf at any real z.
  double poly(double z, int m) const {
    double s = 0.0;
    for (std::size_t k = pmf_.size(); k-- > std::size_t(m);) {
      double fall = 1.0;
      for (int i = 0; i < m; ++i) fall *= double(k - i);
      s = s * z + fall * pmf_[k];
    }
    return s;
  }

  void build_cache() {
    if (family_ != Family::table) {
      pmf_.assign(1, q0_);
      pmf_.push_back(0.0);
      double acc = q0_;
      for (long k = 2; k < 1024 && acc < 1.0 - 1e-16; ++k) {
        double p;
        if (family_ == Family::igw) {
          p = k == 2 ? (1.0 - param_) / (2.0 * param_) : pmf_.back() * (double(k - 1) - 1.0 / param_) / double(k);
        } else {
          p = pmf(k);
        }
        pmf_.push_back(p);
        acc += p;
      }
    }
    cdf_.resize(pmf_.size());
    std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
  }

  Family family_;
  double param_ = 0.0;
  double q0_ = 0.0;
  double c_ = 0.0;
  double mean_ = 1.0;
  std::string name_;
  std::optional<std::pair<long, long>> rational_;
  std::vector<double> pmf_;  // full pmf for tables, cached head otherwise
  std::vector<double> cdf_;
};

// Regularity exponent L from 2 - u (1 - Q'(x)) / (Q(x) - x) at x = 1 - 10^{-j}, j = 2..8.
// This equals (1-x) g'(x) / g(x) identically.
inline RegularityProfile estimate_L(const OffspringDistribution& d, double tol = 0.02) {
  if (!d.is_critical()) throw std::domain_error("estimate_L requires a critical law");
  RegularityProfile r;
  for (int j = 2; j <= 8; ++j) {
    const double u = std::pow(10.0, -j), x = 1.0 - u;
    r.probes.push_back(x);
    r.estimates.push_back(2.0 - u * d.one_minus_Q_prime(x) / d.Q_minus_identity(x));
  }
  const std::size_t n = r.estimates.size();
  r.value = r.estimates.back();
  r.converged = std::abs(r.estimates[n - 1] - r.estimates[n - 2]) <= tol;
  return r;
}

// Lambda = lim k P(X >= k) / E[X 1{X >= k}] at k = 2^j. Empty for finite variance.
inline std::optional<RegularityProfile> estimate_Lambda(const OffspringDistribution& d, int cap_log2 = 40,
                                                        double tol = 1e-3) {
  if (!d.is_critical()) throw std::domain_error("estimate_Lambda requires a critical law");
  if (d.finite_second_moment()) return std::nullopt;
  if (cap_log2 < 4) throw std::invalid_argument("estimate_Lambda: cap too small for convergence");
  RegularityProfile r;
  for (int j = 1; j <= cap_log2; ++j) {
    const double k = std::ldexp(1.0, j);
    r.probes.push_back(k);
    r.estimates.push_back(k * d.tail_probability(long(k)) / d.tail_mean(long(k)));
  }
  const std::size_t n = r.estimates.size();
  r.value = r.estimates.back();
  r.converged = std::abs(r.estimates[n - 1] - r.estimates[n - 2]) <= tol;
  if (!r.converged) throw std::runtime_error("estimate_Lambda: cap too small for convergence");
  return r;
}

// Relation between the two exponents: L = 2 - 1/(1 - Lambda).
inline double L_from_Lambda(double lambda_exp) { return 2.0 - 1.0 / (1.0 - lambda_exp); }

}  // namespace igw
