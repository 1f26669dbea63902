#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "igw/tree.hpp"

namespace igw {

struct GofReport {
  std::string test;
  double statistic = 0.0;
  std::size_t sample_size = 0;
  double threshold = 0.0;
  bool pass = false;
  std::optional<std::pair<double, double>> range;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j{{"test", test},        {"statistic", statistic}, {"sample_size", sample_size},
                     {"threshold", threshold}, {"verdict", pass ? "pass" : "fail"}};
    if (range) j["range"] = {range->first, range->second};
    if (std::isfinite(p_value)) j["p_value"] = p_value;
    if (!details.empty()) j["details"] = details;
    return j;
  }
};

// Asymptotic Kolmogorov tail P(sqrt(n) D > x).
inline double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

// Sup |F_n - F| over [lo, hi], where F_n counts `sorted` out of n_total draws;
// draws missing from `sorted` (censored) lie beyond hi.
inline double ks_statistic(const std::vector<double>& sorted, const std::function<double(double)>& cdf,
                           std::size_t n_total = 0, double lo = -std::numeric_limits<double>::infinity(),
                           double hi = std::numeric_limits<double>::infinity()) {
  if (n_total == 0) n_total = sorted.size();
  if (n_total < 100) throw std::invalid_argument("ks_statistic: at least 100 samples required");
  if (!(lo < hi)) throw std::invalid_argument("ks_statistic: empty comparison range");
  if (!std::is_sorted(sorted.begin(), sorted.end())) throw std::invalid_argument("ks_statistic: samples not sorted");
  const double n = double(n_total);
  std::size_t i = std::lower_bound(sorted.begin(), sorted.end(), lo) - sorted.begin();
  double d = 0.0;
  if (std::isfinite(lo)) d = std::abs(cdf(lo) - double(i) / n);
  while (i < sorted.size() && sorted[i] <= hi) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double f = cdf(sorted[i]);
    d = std::max({d, std::abs(f - double(i) / n), std::abs(f - double(j) / n)});
    i = j;
  }
  if (std::isfinite(hi)) d = std::max(d, std::abs(cdf(hi) - double(i) / n));
  return d;
}

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::vector<double> observed;  // merged
  std::vector<double> expected;  // merged, counts
};

// Pearson test; adjacent categories are merged until every expected count is >= min_expected.
inline ChiSquare chi_square_pmf(const std::vector<double>& observed, const std::vector<double>& expected_pmf,
                                double n, double min_expected = 5.0) {
  if (observed.size() != expected_pmf.size()) throw std::invalid_argument("chi_square_pmf: size mismatch");
  double mass = 0.0;
  for (double p : expected_pmf) {
    if (p < 0.0) throw std::invalid_argument("chi_square_pmf: negative probability");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw std::invalid_argument("chi_square_pmf: expected pmf must sum to 1");
  ChiSquare r;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += observed[i];
    e += expected_pmf[i] * n;
    if (e >= min_expected) {
      r.observed.push_back(o);
      r.expected.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (r.expected.empty()) throw std::invalid_argument("chi_square_pmf: insufficient expected mass");
    r.observed.back() += o;
    r.expected.back() += e;
  }
  if (r.expected.size() < 2) throw std::invalid_argument("chi_square_pmf: insufficient expected mass");
  for (std::size_t i = 0; i < r.expected.size(); ++i) {
    const double diff = r.observed[i] - r.expected[i];
    r.statistic += diff * diff / r.expected[i];
  }
  r.dof = int(r.expected.size()) - 1;
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
  return r;
}

struct RateFit {
  double rate = 0.0;
  double lower = 0.0;  // 95% interval
  double upper = 0.0;
  std::size_t n = 0;
  bool degenerate = false;  // all lengths equal: not exponential-looking data
};

inline RateFit fit_exponential_rate(const std::vector<double>& lengths) {
  if (lengths.size() < 100) throw std::invalid_argument("fit_exponential_rate: at least 100 lengths required");
  double sum = 0.0;
  const double first = lengths.front();
  bool all_equal = true;
  for (double x : lengths) {
    if (!(x > 0.0)) throw std::invalid_argument("fit_exponential_rate: nonpositive length");
    sum += x;
    all_equal = all_equal && x == first;
  }
  RateFit f;
  f.n = lengths.size();
  f.rate = double(f.n) / sum;
  const double a = double(f.n);
  f.lower = boost::math::gamma_p_inv(a, 0.025) / sum;
  f.upper = boost::math::gamma_p_inv(a, 0.975) / sum;
  f.degenerate = all_equal;
  return f;
}

// Same fit from the sufficient statistics (count, sum) of pooled lengths.
inline RateFit fit_exponential_rate(std::size_t n, double sum) {
  if (n < 100) throw std::invalid_argument("fit_exponential_rate: at least 100 lengths required");
  if (!(sum > 0.0)) throw std::invalid_argument("fit_exponential_rate: nonpositive length");
  RateFit f;
  f.n = n;
  f.rate = double(n) / sum;
  f.lower = boost::math::gamma_p_inv(double(n), 0.025) / sum;
  f.upper = boost::math::gamma_p_inv(double(n), 0.975) / sum;
  return f;
}

// Counts shapes by canonical code. Trees above max_edges go to a single "large" key.
class ShapeCounter {
 public:
  explicit ShapeCounter(std::size_t max_edges = std::numeric_limits<std::size_t>::max()) : max_edges_(max_edges) {}

  void add(const CombinatorialTree& t) {
    ++total_;
    if (t.edge_count() > max_edges_)
      ++counts_["large"];
    else
      ++counts_[canonical_code(t)];
  }
  void add_code(const std::string& code) {
    ++total_;
    ++counts_[code];
  }
  void merge(const ShapeCounter& o) {
    total_ += o.total_;
    for (const auto& [k, v] : o.counts_) counts_[k] += v;
  }
  std::size_t total() const { return total_; }
  std::size_t count(const std::string& code) const {
    auto it = counts_.find(code);
    return it == counts_.end() ? 0 : it->second;
  }
  std::map<std::string, double> frequencies() const {
    std::map<std::string, double> f;
    for (const auto& [k, v] : counts_) f[k] = double(v) / double(total_);
    return f;
  }

 private:
  std::size_t max_edges_;
  std::size_t total_ = 0;
  std::map<std::string, std::size_t> counts_;
};

inline std::map<std::string, double> shape_frequency(const std::vector<CombinatorialTree>& trees) {
  ShapeCounter c;
  for (const auto& t : trees) c.add(t);
  return c.frequencies();
}

inline bool majority(const std::vector<bool>& verdicts) {
  return std::count(verdicts.begin(), verdicts.end(), true) * 2 > long(verdicts.size());
}

}  // namespace igw
