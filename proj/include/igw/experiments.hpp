#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "igw/analytics.hpp"
#include "igw/newick.hpp"
#include "igw/offspring.hpp"
#include "igw/pruning.hpp"
#include "igw/sampler.hpp"
#include "igw/stats.hpp"
#include "igw/tree.hpp"

#ifndef IGW_CODE_VERSION
#define IGW_CODE_VERSION "1.0.0"
#endif

namespace igw {

inline constexpr const char* code_version = IGW_CODE_VERSION;

struct ExperimentSpec {
  std::string name;
  std::string dist = "igw:0.5";
  double lambda = 1.0;
  std::string phi = "height";
  std::vector<double> thresholds;  // explicit thresholds; empty = derive from p_targets
  std::vector<double> p_targets;   // target survival probabilities
  std::uint64_t replicates = 100000;
  std::uint64_t seed = 42;
  int seeds = 1;  // repetitions with seeds seed, seed+1, ...; verdict by majority
  std::uint64_t budget = 1'000'000;
  double tolerance = 0.01;
  double max_censor_rate = 0.01;
  double series_cap = 40.0;  // largest lambda q x used by the length series
  long prec_bits = 0;        // 0 = automatic
  double expected = std::numeric_limits<double>::quiet_NaN();  // reference attractor parameter
  int horton_steps = 3;
  unsigned threads = 0;
  std::string out_dir;

  nlohmann::json to_json() const {
    return {{"name", name},
            {"dist", dist},
            {"lambda", lambda},
            {"phi", phi},
            {"thresholds", thresholds},
            {"p_targets", p_targets},
            {"replicates", replicates},
            {"seed", seed},
            {"seeds", seeds},
            {"budget", budget},
            {"tolerance", tolerance},
            {"max_censor_rate", max_censor_rate},
            {"series_cap", series_cap},
            {"prec_bits", prec_bits},
            {"horton_steps", horton_steps},
            {"expected", std::isfinite(expected) ? nlohmann::json(expected) : nlohmann::json()},
            {"out_dir", out_dir}};
  }

  static ExperimentSpec from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("name", s.name);
    get("dist", s.dist);
    get("lambda", s.lambda);
    get("phi", s.phi);
    get("thresholds", s.thresholds);
    get("p_targets", s.p_targets);
    get("replicates", s.replicates);
    get("seed", s.seed);
    get("seeds", s.seeds);
    get("budget", s.budget);
    get("tolerance", s.tolerance);
    get("max_censor_rate", s.max_censor_rate);
    get("series_cap", s.series_cap);
    get("prec_bits", s.prec_bits);
    get("horton_steps", s.horton_steps);
    if (j.contains("expected") && !j.at("expected").is_null()) j.at("expected").get_to(s.expected);
    get("threads", s.threads);
    get("out_dir", s.out_dir);
    return s;
  }
};

struct ExperimentReport {
  std::string name;
  ExperimentSpec spec;
  std::vector<GofReport> checks;
  nlohmann::json table = nlohmann::json::array();
  nlohmann::json notes = nlohmann::json::object();
  double seconds = 0.0;

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const GofReport& g) { return g.pass; });
  }

  const GofReport& check(const std::string& test) const {
    for (const auto& c : checks)
      if (c.test == test) return c;
    throw std::out_of_range("no check named " + test);
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"name", name},
                     {"spec", spec.to_json()},
                     {"seed", spec.seed},
                     {"code_version", code_version},
                     {"verdict", pass() ? "pass" : "fail"},
                     {"seconds", seconds},
                     {"checks", nlohmann::json::array()},
                     {"table", table}};
    for (const auto& c : checks) j["checks"].push_back(c.to_json());
    if (!notes.empty()) j["notes"] = notes;
    return j;
  }

  // Rows of the table as CSV, columns from the first row.
  std::string table_csv() const {
    if (table.empty() || !table.front().is_object()) return "";
    std::vector<std::string> cols;
    for (const auto& [k, v] : table.front().items()) cols.push_back(k);
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += "\n";
    for (const auto& row : table) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ",";
        const auto& v = row.value(cols[i], nlohmann::json());
        out += v.is_string() ? v.get<std::string>() : v.dump();
      }
      out += "\n";
    }
    return out;
  }

  void write(const std::string& dir) const {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    std::ofstream(dir + "/" + name + ".json") << to_json().dump(2) << "\n";
    const auto csv = table_csv();
    if (!csv.empty()) std::ofstream(dir + "/" + name + ".csv") << csv;
  }
};

// ---------------------------------------------------------------- helpers

inline ExperimentReport make_report(std::string name, const ExperimentSpec& spec) {
  ExperimentReport r;
  r.name = std::move(name);
  r.spec = spec;
  return r;
}

inline GofReport check_at_most(std::string test, double statistic, double threshold, std::size_t n = 0) {
  GofReport g;
  g.test = std::move(test);
  g.statistic = statistic;
  g.threshold = threshold;
  g.sample_size = n;
  g.pass = statistic <= threshold;
  g.details["rule"] = "statistic <= threshold";
  return g;
}

inline GofReport check_at_least(std::string test, double statistic, double threshold, std::size_t n = 0) {
  GofReport g = check_at_most(std::move(test), statistic, threshold, n);
  g.pass = statistic >= threshold;
  g.details["rule"] = "statistic >= threshold";
  return g;
}

inline GofReport check_true(std::string test, bool ok, nlohmann::json details = nlohmann::json::object()) {
  GofReport g;
  g.test = std::move(test);
  g.statistic = ok ? 1.0 : 0.0;
  g.threshold = 1.0;
  g.pass = ok;
  g.details = std::move(details);
  return g;
}

// Verdict by majority over repetitions; the reported statistic is the median.
inline GofReport majority_report(const std::string& test, const std::vector<GofReport>& runs) {
  if (runs.empty()) throw std::invalid_argument("majority_report: no runs");
  GofReport g = runs.front();
  g.test = test;
  std::vector<bool> verdicts;
  std::vector<double> stats;
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& r : runs) {
    verdicts.push_back(r.pass);
    stats.push_back(r.statistic);
    per_seed.push_back({{"statistic", r.statistic}, {"pass", r.pass}, {"p_value", r.p_value}});
  }
  std::sort(stats.begin(), stats.end());
  g.statistic = stats[stats.size() / 2];
  g.pass = majority(verdicts);
  g.details["runs"] = per_seed;
  g.details["rule"] = runs.front().details.value("rule", "") + ", majority of runs";
  return g;
}

inline GofReport chi_square_report(std::string test, const std::vector<double>& observed,
                                   const std::vector<double>& pmf, double n, bool expect_rejection = false,
                                   double level = 0.01) {
  const auto c = chi_square_pmf(observed, pmf, n);
  GofReport g;
  g.test = std::move(test);
  g.statistic = c.p_value;
  g.p_value = c.p_value;
  g.threshold = level;
  g.sample_size = std::size_t(n);
  g.pass = expect_rejection ? c.p_value < level : c.p_value >= level;
  g.details = {{"chi2", c.statistic},
               {"dof", c.dof},
               {"rule", expect_rejection ? "p_value < threshold" : "p_value >= threshold"}};
  return g;
}

inline double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Category probabilities 0..k_max plus a final bucket holding the remaining mass.
inline std::vector<double> pmf_with_tail(const std::function<double(long)>& pmf, long k_max) {
  std::vector<double> p;
  double s = 0.0;
  for (long k = 0; k <= k_max; ++k) {
    p.push_back(pmf(k));
    s += p.back();
  }
  p.push_back(std::max(0.0, 1.0 - s));
  const double total = s + p.back();
  for (double& v : p) v /= total;
  return p;
}

inline std::vector<double> histogram_with_tail(const std::vector<std::size_t>& counts, long k_max) {
  std::vector<double> h(std::size_t(k_max) + 2, 0.0);
  for (std::size_t k = 0; k < counts.size(); ++k) h[std::min<std::size_t>(k, std::size_t(k_max) + 1)] += double(counts[k]);
  return h;
}

inline OffspringDistribution parse_dist(const std::string& spec) { return OffspringDistribution::parse(spec); }

inline double igw_q(const OffspringDistribution& d) {
  if (d.family() != Family::igw) throw std::invalid_argument("experiment requires an IGW distribution, got " + d.name());
  return d.parameter();
}

// ---------------------------------------------------------------- surveys

struct TreeSummary {
  bool censored = false;
  double height = 0.0;
  double length = 0.0;
  std::uint64_t edges = 0;
};

inline std::vector<TreeSummary> sample_summaries(const OffspringDistribution& d, std::optional<double> lambda,
                                                 std::size_t n, std::uint64_t seed, std::uint64_t budget,
                                                 unsigned threads = 0) {
  return map_replicates(
      0, n,
      [&](std::uint32_t r) {
        TreeSummary s;
        SampleConfig cfg{seed, r, budget, lambda};
        if (lambda) {
          auto o = sample_metric(d, cfg);
          s.censored = o.censored;
          s.edges = o.nodes;
          if (o.tree) {
            s.height = tree_height(*o.tree);
            s.length = tree_length(*o.tree);
          }
        } else {
          auto o = sample_shape(d, cfg);
          s.censored = o.censored;
          s.edges = o.nodes;
        }
        return s;
      },
      threads);
}

// Reduction applied to each sampled tree in a survey.
using Reducer = std::function<PrunedResult(const MetricTree&, std::uint32_t replicate)>;

struct SurveyRecord {
  bool censored = false;
  bool survived = false;
  std::uint32_t first_k = 0;  // children of the first vertex of the reduced tree
  std::uint32_t orig_k = 0;   // children of the first vertex of the input tree
  std::uint32_t orig_m = 0;   // of which retained
  std::uint64_t edges = 0;    // edges of the reduced tree
  double length_sum = 0.0;    // total length of the reduced tree
  std::string shape;          // canonical code of small reduced trees, "large" otherwise
};

struct Survey {
  std::size_t trees = 0;
  std::size_t survivors = 0;  // censored inputs included
  std::size_t censored = 0;
  std::vector<std::size_t> first_k;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> first_km;
  std::size_t edges = 0;
  long double length_sum = 0.0;
  ShapeCounter shapes{5};

  double p_hat() const { return double(survivors) / double(trees); }
  std::size_t observed() const { return survivors - censored; }
};

// Samples trees for replicates first, first+1, ... until `target` uncensored
// survivors are collected or `max_trees` trees were drawn. Censored trees count
// as survivors in the survival estimate and are excluded from every histogram.
inline Survey run_survey(const OffspringDistribution& d, double lambda, const Reducer& reduce, std::size_t target,
                         std::size_t max_trees, std::uint64_t seed, std::uint64_t budget, unsigned threads = 0,
                         std::uint32_t first = 0, std::size_t shape_cap = 5) {
  Survey s;
  s.shapes = ShapeCounter(shape_cap);
  const std::size_t batch = 8192;
  while (s.observed() < target && s.trees < max_trees) {
    const std::size_t n = std::min(batch, max_trees - s.trees);
    auto recs = map_replicates(
        first + std::uint32_t(s.trees), n,
        [&](std::uint32_t r) {
          SurveyRecord rec;
          auto o = sample_metric(d, {seed, r, budget, lambda});
          if (!o.tree) {
            rec.censored = rec.survived = true;
            return rec;
          }
          const MetricTree& t = *o.tree;
          const auto res = reduce(t, r);
          rec.survived = res.survived;
          rec.orig_k = t.child_count(1);
          if (!res.retained.empty())
            for (std::uint32_t i = 0; i < rec.orig_k; ++i) rec.orig_m += res.retained[t.child(1, i)] > 0.0;
          if (res.survived) {
            const MetricTree& p = res.tree;
            rec.first_k = p.child_count(1);
            rec.edges = p.edge_count();
            for (Vertex v = 1; v < p.vertex_count(); ++v) rec.length_sum += p.length(v);
            rec.shape = p.edge_count() <= shape_cap ? canonical_code(p) : "large";
          }
          return rec;
        },
        threads);
    for (const auto& rec : recs) {
      if (s.observed() >= target) break;
      ++s.trees;
      if (rec.censored) {
        ++s.censored;
        ++s.survivors;
        continue;
      }
      if (!rec.survived) continue;
      ++s.survivors;
      if (s.first_k.size() <= rec.first_k) s.first_k.resize(rec.first_k + 1, 0);
      ++s.first_k[rec.first_k];
      ++s.first_km[{rec.orig_k, rec.orig_m}];
      s.edges += rec.edges;
      s.length_sum += rec.length_sum;
      s.shapes.add_code(rec.shape);
    }
  }
  return s;
}

// ---------------------------------------------------------------- thresholds

inline constexpr std::uint32_t pilot_offset = 1u << 31;

// Threshold t whose empirical survival P(phi(T) >= t) is about p, from pilot
// replicates disjoint from the main run. Censored trees count as phi = infinity.
inline double pilot_threshold(const OffspringDistribution& d, double lambda, const PhiFunctional& phi, double p,
                              std::size_t n, std::uint64_t seed, std::uint64_t budget, unsigned threads = 0) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("pilot_threshold: p must lie in (0, 1)");
  auto vals = map_replicates(
      pilot_offset, n,
      [&](std::uint32_t r) {
        auto o = sample_metric(d, {seed, r, budget, lambda});
        return o.tree ? phi.evaluate(*o.tree) : std::numeric_limits<double>::infinity();
      },
      threads);
  std::sort(vals.begin(), vals.end(), std::greater<>());
  return vals[std::min(n - 1, std::size_t(p * double(n)))];
}

inline double choose_threshold(const ExperimentSpec& spec, const OffspringDistribution& d, const PhiFunctional& phi,
                               double p, std::size_t index = 0) {
  if (index < spec.thresholds.size()) return spec.thresholds[index];
  if (phi.name() == "height" && d.family() == Family::igw) return height_threshold_for(d.parameter(), spec.lambda, p);
  const std::size_t pilot = std::max<std::size_t>(20000, std::size_t(200.0 / p));
  return pilot_threshold(d, spec.lambda, phi, p, pilot, spec.seed, spec.budget, spec.threads);
}

inline Reducer gdp_reducer(const PhiFunctional& phi, double threshold) {
  return [phi, threshold](const MetricTree& t, std::uint32_t) { return gdp_prune(t, phi, threshold); };
}

inline Reducer horton_reducer(int steps) {
  return [steps](const MetricTree& t, std::uint32_t) {
    PrunedResult r;
    r.tree = t;
    for (int i = 0; i < steps && !r.tree.empty(); ++i) r.tree = horton_prune(r.tree);
    r.survived = !r.tree.empty();
    return r;
  };
}

inline Reducer coloring_reducer(double p, std::uint64_t seed) {
  return [p, seed](const MetricTree& t, std::uint32_t r) {
    Stream rng(seed, r, substream::coloring);
    return bernoulli_color(t, p, rng);
  };
}

inline std::size_t max_trees_for(std::size_t survivors, double p) {
  return std::size_t(std::ceil(3.0 * double(survivors) / std::max(p, 1e-6))) + 10000;
}

inline std::uint64_t seed_of(const ExperimentSpec& spec, int i) { return spec.seed + std::uint64_t(i); }

inline std::optional<std::pair<long, long>> as_rational(const OffspringDistribution& d) {
  if (auto r = d.rational_parameter()) return r;
  for (long den = 2; den <= 64; ++den) {
    const double num = d.parameter() * double(den);
    if (num == std::round(num)) return std::pair<long, long>{long(num), den};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- Monte Carlo verification

inline ExperimentReport run_verify_height(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  const double q = igw_q(d), lam = spec.lambda;
  auto rep = make_report("verify-height", spec);
  const auto sums = sample_summaries(d, lam, spec.replicates, spec.seed, spec.budget, spec.threads);
  std::vector<double> h;
  std::size_t cens = 0;
  for (const auto& s : sums) {
    if (s.censored)
      ++cens;
    else
      h.push_back(s.height);
  }
  std::sort(h.begin(), h.end());
  const std::size_t n = sums.size();
  const double rate = double(cens) / double(n);
  if (rate > spec.max_censor_rate) throw std::runtime_error("verify-height: censor rate above bound");
  const double hi = cens ? height_threshold_for(q, lam, 10.0 * rate) : std::numeric_limits<double>::infinity();
  auto H = [&](double x) { return height_cdf(q, lam, x); };
  GofReport ks = check_at_most("ks_height", ks_statistic(h, H, n, 0.0, hi), spec.tolerance, n);
  if (cens) ks.range = std::pair{0.0, hi};
  ks.details["censored"] = cens;
  ks.details["censor_rate"] = rate;
  rep.checks.push_back(ks);
  const double qw = q + 0.1 < 1.0 ? q + 0.1 : q - 0.1;
  GofReport power = check_at_least(
      "power_wrong_q", ks_statistic(h, [&](double x) { return height_cdf(qw, lam, x); }, n, 0.0, hi),
      spec.tolerance, n);
  power.details["wrong_q"] = qw;
  rep.checks.push_back(power);
  if (q == 0.5) {
    double worst = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double x = 0.01 * i;
      worst = std::max(worst, std::abs(H(x) - lam * x / (lam * x + 2.0)));
    }
    rep.checks.push_back(check_at_most("closed_form_q_half", worst, 1e-12));
  }
  for (double f : {0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    const double x = h[std::min(h.size() - 1, std::size_t(f * double(n)))];
    rep.table.push_back({{"x", x}, {"empirical", f}, {"analytic", H(x)}});
  }
  rep.seconds = elapsed_since(t0);
  return rep;
}

inline ExperimentReport run_verify_length(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  const double q = igw_q(d), lam = spec.lambda;
  auto rep = make_report("verify-length", spec);
  SeriesPolicy policy;
  if (spec.prec_bits) policy.fixed_bits = spec.prec_bits;
  const double series_x = spec.series_cap / (lam * q);
  const bool bessel = q == 0.5;
  const double x_max = bessel ? 1000.0 / lam : series_x;
  auto table = bessel ? TabulatedCdf(
                            [&](const std::vector<double>& xs) {
                              std::vector<double> f;
                              for (double x : xs) f.push_back(1.0 - length_survival_bessel(lam, x));
                              return f;
                            },
                            x_max, 4000)
                      : length_cdf_table(q, lam, x_max, 4000, policy);
  const auto sums = sample_summaries(d, lam, spec.replicates, spec.seed, spec.budget, spec.threads);
  std::vector<double> len;
  std::size_t cens = 0;
  for (const auto& s : sums) {
    if (s.censored)
      ++cens;
    else
      len.push_back(s.length);
  }
  std::sort(len.begin(), len.end());
  const std::size_t n = sums.size();
  const double rate = double(cens) / double(n);
  if (rate > spec.max_censor_rate) throw std::runtime_error("verify-length: censor rate above bound");
  double hi = x_max;
  if (cens) {
    const auto& xs = table.grid();
    const auto& fs = table.values();
    std::size_t i = 0;
    while (i + 1 < xs.size() && fs[i + 1] <= 1.0 - 10.0 * rate) ++i;
    hi = std::min(hi, xs[i]);
  }
  GofReport ks = check_at_most("ks_length", ks_statistic(len, table, n, 0.0, hi), spec.tolerance, n);
  ks.range = std::pair{0.0, hi};
  ks.details["censored"] = cens;
  ks.details["censor_rate"] = rate;
  ks.details["oracle"] = bessel ? "bessel" : "series";
  rep.checks.push_back(ks);
  if (bessel) {
    LengthSeries series(q, lam, series_x, policy);
    double worst = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double x = series_x * i / 200.0;
      worst = std::max(worst, std::abs(series.cdf(x) - table(x)));
    }
    // Interpolation error of the table dominates; the pointwise check is in length-series.
    rep.checks.push_back(check_at_most("series_vs_bessel_table", worst, 1e-5));
  }
  for (double x : {10.0, 30.0, 50.0}) {
    if (x > x_max) continue;
    const double surv = bessel ? length_survival_bessel(lam, x) : 1.0 - table(x);
    rep.table.push_back({{"x", x}, {"survival", surv}, {"tail_ratio", surv / length_tail(q, lam, x)}});
  }
  rep.seconds = elapsed_since(t0);
  return rep;
}

inline ExperimentReport run_verify_size(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  const double q = igw_q(d);
  auto rep = make_report("verify-size", spec);
  const long K = 30;
  std::vector<double> pmf(K + 1, 0.0);
  double head = 0.0;
  if (auto r = as_rational(d)) {
    const auto alpha = size_pmf_oracle(igw_pmf_exact(r->first, r->second, K), K);
    bool equal = true;
    for (long n = 1; n <= K; ++n) {
      const mpq_class exact = size_pmf_exact(r->first, r->second, n);
      equal = equal && exact == alpha[n];
      pmf[n - 1] = exact.get_d();
    }
    rep.checks.push_back(check_true("oracle_equals_closed_form", equal, {{"n_max", K}}));
  } else {
    for (long n = 1; n <= K; ++n) pmf[n - 1] = size_pmf(q, n);
  }
  for (long n = 0; n < K; ++n) head += pmf[n];
  pmf[K] = 1.0 - head;
  std::vector<GofReport> runs;
  for (int i = 0; i < std::max(1, spec.seeds); ++i) {
    const auto sums = sample_summaries(d, std::nullopt, spec.replicates, seed_of(spec, i), spec.budget, spec.threads);
    std::vector<double> obs(K + 1, 0.0);
    for (const auto& s : sums) obs[!s.censored && s.edges <= std::uint64_t(K) ? s.edges - 1 : K] += 1.0;
    runs.push_back(chi_square_report("chi2_size", obs, pmf, double(sums.size())));
    rep.table.push_back({{"seed", seed_of(spec, i)}, {"p_value", runs.back().p_value}});
  }
  rep.checks.push_back(majority_report("chi2_size", runs));
  rep.seconds = elapsed_since(t0);
  return rep;
}

// Offspring law of the first vertex of reduced trees against `pmf`.
inline GofReport first_vertex_chi2(const std::string& test, const Survey& s, const std::function<double(long)>& pmf,
                                   bool expect_rejection = false, long k_max = 64) {
  return chi_square_report(test, histogram_with_tail(s.first_k, k_max), pmf_with_tail(pmf, k_max),
                           double(s.observed()), expect_rejection);
}

inline ExperimentReport run_invariance(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  const double q = igw_q(d), lam = spec.lambda;
  const auto phi = PhiFunctional::by_name(spec.phi);
  const double p = spec.p_targets.empty() ? 0.5 : spec.p_targets.front();
  const double t = choose_threshold(spec, d, phi, p);
  auto rep = make_report("invariance", spec);
  rep.notes["threshold"] = t;
  std::vector<GofReport> chi, rate, closed;
  for (int i = 0; i < std::max(1, spec.seeds); ++i) {
    const auto s = run_survey(d, lam, gdp_reducer(phi, t), spec.replicates, max_trees_for(spec.replicates, p),
                              seed_of(spec, i), spec.budget, spec.threads);
    chi.push_back(first_vertex_chi2("chi2_offspring", s, [&](long k) { return igw_pmf(q, k); }));
    const auto fit = fit_exponential_rate(s.edges, double(s.length_sum));
    const double expected = lam * std::pow(s.p_hat(), (1.0 - q) / q);
    rate.push_back(check_at_most("edge_rate", std::abs(fit.rate / expected - 1.0), spec.tolerance, s.edges));
    nlohmann::json row{{"seed", seed_of(spec, i)}, {"trees", s.trees},     {"survivors", s.survivors},
                       {"p_hat", s.p_hat()},       {"rate", fit.rate},     {"expected_rate", expected},
                       {"chi2_p", chi.back().p_value}};
    if (phi.name() == "height") {
      const double analytic = lam / (lam * (1.0 - q) * t + 1.0);
      closed.push_back(check_at_most("edge_rate_closed_form", std::abs(fit.rate / analytic - 1.0), spec.tolerance));
      row["closed_form_rate"] = analytic;
    }
    rep.table.push_back(row);
  }
  rep.checks.push_back(majority_report("chi2_offspring", chi));
  rep.checks.push_back(majority_report("edge_rate", rate));
  if (!closed.empty()) rep.checks.push_back(majority_report("edge_rate_closed_form", closed));
  rep.seconds = elapsed_since(t0);
  return rep;
}

inline ExperimentReport run_uniqueness_falsification(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  if (d.family() == Family::igw) throw std::invalid_argument("uniqueness: needs a non-IGW law (use invariance)");
  if (!d.is_critical()) throw std::invalid_argument("uniqueness: needs a critical law");
  const auto phi = PhiFunctional::by_name(spec.phi);
  const double p = spec.p_targets.empty() ? 0.5 : spec.p_targets.front();
  const double t = choose_threshold(spec, d, phi, p);
  auto rep = make_report("uniqueness", spec);
  rep.notes["threshold"] = t;
  std::vector<GofReport> reject, predicted;
  for (int i = 0; i < std::max(1, spec.seeds); ++i) {
    const auto s = run_survey(d, spec.lambda, gdp_reducer(phi, t), spec.replicates, max_trees_for(spec.replicates, p),
                              seed_of(spec, i), spec.budget, spec.threads);
    reject.push_back(first_vertex_chi2("rejects_original_law", s, [&](long k) { return d.pmf(k); }, true));
    const auto law = pushforward_offspring(d, s.p_hat());
    predicted.push_back(first_vertex_chi2("matches_pushforward_law", s, [&](long k) { return law.pmf(k); }));
    rep.table.push_back({{"seed", seed_of(spec, i)},
                         {"p_hat", s.p_hat()},
                         {"g0_observed", double(s.first_k[0]) / double(s.observed())},
                         {"g0_pushforward", law.g[0]},
                         {"q0_original", d.pmf(0)},
                         {"p_original", reject.back().p_value},
                         {"p_pushforward", predicted.back().p_value}});
  }
  rep.checks.push_back(majority_report("rejects_original_law", reject));
  rep.checks.push_back(majority_report("matches_pushforward_law", predicted));
  rep.seconds = elapsed_since(t0);
  return rep;
}

// Joint law of (children, retained children) at the first vertex given survival.
inline ExperimentReport run_thinning(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  const auto phi = PhiFunctional::by_name(spec.phi);
  const double p = spec.p_targets.empty() ? 0.5 : spec.p_targets.front();
  const double t = choose_threshold(spec, d, phi, p);
  auto rep = make_report("thinning", spec);
  rep.notes["threshold"] = t;
  const long k_max = long(d.support_max().value_or(20));
  std::vector<GofReport> runs;
  for (int i = 0; i < std::max(1, spec.seeds); ++i) {
    const auto s = run_survey(d, spec.lambda, gdp_reducer(phi, t), spec.replicates, max_trees_for(spec.replicates, p),
                              seed_of(spec, i), spec.budget, spec.threads);
    const double ph = s.p_hat();
    std::vector<double> obs, pmf;
    double rest_obs = double(s.observed()), rest_p = 1.0;
    for (long k = 2; k <= k_max; ++k) {
      for (long m = 1; m <= k; ++m) {
        const double prob = std::exp(std::lgamma(k + 1.0) - std::lgamma(m + 1.0) - std::lgamma(k - m + 1.0)) *
                            std::pow(ph, double(m)) * std::pow(1.0 - ph, double(k - m)) * d.pmf(k) / ph;
        auto it = s.first_km.find({std::uint32_t(k), std::uint32_t(m)});
        const double o = it == s.first_km.end() ? 0.0 : double(it->second);
        obs.push_back(o);
        pmf.push_back(prob);
        rest_obs -= o;
        rest_p -= prob;
        if (i == 0 && k <= 3) rep.table.push_back({{"k", k}, {"m", m}, {"observed", o / double(s.observed())}, {"expected", prob}});
      }
    }
    obs.push_back(rest_obs);
    pmf.push_back(rest_p);
    runs.push_back(chi_square_report("chi2_thinning", obs, pmf, double(s.observed())));
    runs.back().details["p_hat"] = ph;
  }
  rep.checks.push_back(majority_report("chi2_thinning", runs));
  rep.seconds = elapsed_since(t0);
  return rep;
}

// ---------------------------------------------------------------- attractors

inline double reference_q(const ExperimentSpec& spec, const OffspringDistribution& d) {
  return std::isfinite(spec.expected) ? spec.expected : attractor_q(d);
}

inline ExperimentReport run_attractor_gf(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  auto rep = make_report("attractor-gf", spec);
  const auto ps = spec.p_targets.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4} : spec.p_targets;
  const bool sub = d.classify() == Criticality::subcritical;
  const double qs = sub ? 1.0 : reference_q(spec, d);
  double last_g0 = 0.0;
  for (double p : ps) {
    const auto law = pushforward_offspring(d, p);
    double dist = 0.0;
    for (long m = 0; m <= 20; ++m) dist = std::max(dist, std::abs(law.pmf(m) - (sub ? double(m == 0) : igw_pmf(qs, m))));
    rep.table.push_back({{"p", p},
                         {"g0", law.g[0]},
                         {"g2", law.pmf(2)},
                         {"tail_mass", law.tail_mass},
                         {"rate_multiplier", law.rate_multiplier},
                         {"sup_distance", dist}});
    last_g0 = law.g[0];
  }
  rep.notes["attractor_q"] = qs;
  if (sub)
    rep.checks.push_back(check_at_least("g0_point_mass", last_g0, 1.0 - spec.tolerance));
  else
    rep.checks.push_back(check_at_most("g0_attractor", std::abs(last_g0 - qs), spec.tolerance));
  rep.seconds = elapsed_since(t0);
  return rep;
}

inline std::vector<std::pair<NamedShape, double>> igw_shape_predictions(double q) {
  std::vector<std::pair<NamedShape, double>> out;
  for (auto& s : small_shapes()) {
    const double prob = gw_shape_probability(s.tree, [q](long k) { return igw_pmf(q, k); });
    out.emplace_back(std::move(s), prob);
  }
  return out;
}

// Small-shape frequencies of reduced trees against IGW(q*). Modes: phi = "horton"
// (iterated Horton pruning) or a functional pruned at thresholds reaching p_targets.
inline ExperimentReport run_attractor_mc(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  if (!d.is_critical()) throw std::invalid_argument("attractor-mc: needs a critical law");
  const double qs = reference_q(spec, d);
  const auto predictions = igw_shape_predictions(qs);
  auto rep = make_report("attractor-mc", spec);
  rep.notes["attractor_q"] = qs;
  const bool horton = spec.phi == "horton";
  const auto ps = spec.p_targets.empty() ? std::vector<double>{0.5} : spec.p_targets;
  const std::size_t stages = horton ? 1 : ps.size();
  for (std::size_t st = 0; st < stages; ++st) {
    Reducer red;
    double p_guess = 0.1;
    nlohmann::json row;
    if (horton) {
      red = horton_reducer(spec.horton_steps);
      row["horton_steps"] = spec.horton_steps;
      row["single_edge_exact"] = horton_single_edge_probability(d, spec.horton_steps);
      const auto a = horton_order_cdf(d, spec.horton_steps);
      p_guess = 1.0 - a[spec.horton_steps];
      row["p_exact"] = p_guess;
    } else {
      const auto phi = PhiFunctional::by_name(spec.phi);
      p_guess = ps[st];
      const double t = choose_threshold(spec, d, phi, p_guess, st);
      red = gdp_reducer(phi, t);
      row["threshold"] = t;
    }
    const auto s = run_survey(d, spec.lambda, red, spec.replicates, max_trees_for(spec.replicates, p_guess), spec.seed,
                              spec.budget, spec.threads, std::uint32_t(st) * (1u << 26));
    if (s.observed() < spec.replicates) throw std::runtime_error("attractor-mc: survivor starvation");
    row["p_hat"] = s.p_hat();
    row["survivors"] = s.observed();
    row["censored"] = s.censored;
    if (!horton) row["g0_pushforward"] = pushforward_offspring(d, s.p_hat()).g[0];
    const bool last = st + 1 == stages;
    for (const auto& [shape, prob] : predictions) {
      // Censored survivors have at least `budget` vertices and are counted as large shapes.
      const double count = double(s.shapes.count(canonical_code(shape.tree)));
      const double f = count / double(s.survivors);
      row[shape.name] = f;
      row[shape.name + "_uncensored"] = count / double(s.shapes.total());
      row[shape.name + "_igw"] = prob;
      if (last || d.family() == Family::igw) {
        const double tol = shape.name == "single_edge" ? spec.tolerance : 0.05;
        auto g = check_at_most(shape.name + "_stage" + std::to_string(st), std::abs(f - prob), tol, s.observed());
        g.details["frequency"] = f;
        g.details["prediction"] = prob;
        rep.checks.push_back(g);
      }
    }
    rep.table.push_back(row);
  }
  rep.seconds = elapsed_since(t0);
  return rep;
}

// ---------------------------------------------------------------- coloring

inline ExperimentReport run_coloring(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  const double p = spec.p_targets.empty() ? 0.5 : spec.p_targets.front();
  const double g = coloring_survival(d, p);
  auto rep = make_report("coloring", spec);
  const auto s = run_survey(d, spec.lambda, coloring_reducer(p, spec.seed), std::numeric_limits<std::size_t>::max(),
                            spec.replicates, spec.seed, spec.budget, spec.threads);
  auto surv = check_at_most("survival", std::abs(s.p_hat() - g), 0.01, s.trees);
  surv.details["observed"] = s.p_hat();
  surv.details["oracle"] = g;
  rep.checks.push_back(surv);
  const double n_obs = double(s.observed());
  const double g0_hat = double(s.first_k.empty() ? 0 : s.first_k[0]) / n_obs;
  rep.notes["g_p"] = g;
  rep.notes["g0_observed"] = g0_hat;
  if (d.family() == Family::igw) {
    rep.checks.push_back(first_vertex_chi2("chi2_igw_invariance", s, [&](long k) { return d.pmf(k); }));
  } else {
    const double qs = reference_q(spec, d);
    auto c = check_at_most("g0_attractor", std::abs(g0_hat - qs), spec.tolerance, s.observed());
    c.details["observed"] = g0_hat;
    c.details["attractor_q"] = qs;
    c.details["g0_finite_p"] = pushforward_offspring(d, g).g[0];
    rep.checks.push_back(c);
  }
  // Adjudication of the two readings of the colored generating function.
  nlohmann::json adj = nlohmann::json::array();
  std::vector<std::string> supported;
  for (auto v : {ColoringVariant::as_printed, ColoringVariant::thinned}) {
    nlohmann::json e{{"variant", to_string(v)}};
    double pgf_gap = 0.0;
    bool defined = true;
    try {
      for (int i = 0; i <= 9; ++i) {
        const double z = 0.1 * i;
        double emp = 0.0;
        for (std::size_t k = 0; k < s.first_k.size(); ++k) emp += double(s.first_k[k]) / n_obs * std::pow(z, double(k));
        pgf_gap = std::max(pgf_gap, std::abs(coloring_Q(d, p, g, z, v) - emp));
      }
      e["G_at_1"] = coloring_Q(d, p, g, 1.0, v);
    } catch (const std::domain_error& err) {
      defined = false;
      e["error"] = err.what();
    }
    bool valid = defined;
    if (defined) {
      e["pgf_max_gap"] = pgf_gap;
      try {
        const auto c = coloring_offspring(d, p, g, v);
        double sum = 0.0, neg = 0.0;
        for (double x : c) {
          sum += x;
          neg = std::min(neg, x);
        }
        e["coefficient_sum"] = sum;
        valid = neg > -1e-12 && sum <= 1.0 + 1e-9 && (d.support_max() ? std::abs(sum - 1.0) <= 1e-9 : true);
        if (valid) {
          const auto gr =
              first_vertex_chi2("chi2", s, [&](long k) { return k < long(c.size()) ? c[std::size_t(k)] : 0.0; });
          e["chi2_p"] = gr.p_value;
          valid = gr.pass;
        }
      } catch (const std::exception& err) {
        valid = false;
        e["error"] = err.what();
      }
    }
    e["probability_law"] = valid;
    e["supported"] = valid && pgf_gap <= 0.01;
    if (e["supported"].get<bool>()) supported.push_back(to_string(v));
    adj.push_back(e);
  }
  rep.notes["variant_adjudication"] = adj;
  rep.checks.push_back(check_true("adjudication", !supported.empty(), {{"supported", supported}}));
  rep.table = adj;
  rep.seconds = elapsed_since(t0);
  return rep;
}

// ---------------------------------------------------------------- semigroup

inline ExperimentReport run_semigroup(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = parse_dist(spec.dist);
  auto rep = make_report("semigroup", spec);
  const double s_h = spec.thresholds.size() > 0 ? spec.thresholds[0] : 0.3;
  const double t_h = spec.thresholds.size() > 1 ? spec.thresholds[1] : 0.3;
  auto tree = [&](std::uint32_t r) {
    auto o = sample_metric(d, {spec.seed, r, spec.budget, spec.lambda});
    return o.tree;
  };
  struct Case {
    std::string phi;
    double s, t;
  };
  const std::vector<Case> cases{{"height", s_h, t_h}, {"ord", 1.0, 1.0}, {"ord", 1.0, 2.0}};
  for (const auto& c : cases) {
    const auto phi = PhiFunctional::by_name(c.phi);
    auto eq = map_replicates(
        0, spec.replicates,
        [&](std::uint32_t r) {
          auto t = tree(r);
          return t ? int(semigroup_check(*t, phi, c.s, c.t).equal) : -1;
        },
        spec.threads);
    const std::size_t used = std::count_if(eq.begin(), eq.end(), [](int e) { return e >= 0; });
    const std::size_t equal = std::count(eq.begin(), eq.end(), 1);
    rep.table.push_back({{"phi", c.phi}, {"s", c.s}, {"t", c.t}, {"trees", used}, {"equal", equal}});
    rep.checks.push_back(check_true("equal_" + c.phi + "_" + std::to_string(int(c.t)), equal == used && used > 0,
                                    {{"trees", used}, {"equal", equal}}));
  }
  // phi = length: first counterexample in replicate order.
  const auto len = PhiFunctional::length();
  std::optional<std::uint32_t> found;
  std::size_t scanned = 0;
  for (std::uint32_t r = 0; r < 20 * spec.replicates && !found; ++r, ++scanned) {
    auto t = tree(r);
    if (t && !semigroup_check(*t, len, 1.0, 1.0).equal) found = r;
  }
  nlohmann::json info{{"scanned", scanned}};
  if (found) {
    const auto t = *tree(*found);
    const auto res = semigroup_check(t, len, 1.0, 1.0);
    info["replicate"] = *found;
    info["tree"] = to_newick(t);
    info["composed"] = to_newick(res.composed);
    info["direct"] = to_newick(res.direct);
    if (!spec.out_dir.empty()) {
      std::filesystem::create_directories(spec.out_dir);
      std::ofstream(spec.out_dir + "/semigroup_length_counterexample.nwk")
          << "# phi=length s=1 t=1 seed=" << spec.seed << " replicate=" << *found << "\n"
          << to_newick(t) << "\n";
    }
  }
  rep.table.push_back({{"phi", "length"}, {"s", 1.0}, {"t", 1.0}, {"trees", scanned}, {"equal", scanned - (found ? 1 : 0)}});
  rep.checks.push_back(check_true("length_counterexample", found.has_value(), info));
  rep.seconds = elapsed_since(t0);
  return rep;
}

// ---------------------------------------------------------------- deterministic identities

inline ExperimentReport run_height_ode(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rep = make_report("height-ode", spec);
  const double lam = spec.lambda;
  for (double q : {0.5, 2.0 / 3.0, 0.9}) {
    double worst = 0.0, fixed_point = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double x = 0.1 * i, h = 1e-5;
      const double deriv = (height_cdf(q, lam, x + h) - height_cdf(q, lam, x - h)) / (2.0 * h);
      worst = std::max(worst, std::abs(deriv - lam * q * std::pow(1.0 - height_cdf(q, lam, x), 1.0 / q)));
      fixed_point = std::max(fixed_point, std::abs(1.0 - height_survival_pt(q, lam, x) - height_cdf(q, lam, x)));
      const double pt = height_survival_pt(q, lam, x);
      fixed_point =
          std::max(fixed_point, std::abs(lam * std::pow(pt, (1.0 - q) / q) - lam / (lam * (1.0 - q) * x + 1.0)));
    }
    rep.table.push_back({{"q", q}, {"ode_residual", worst}, {"identity_residual", fixed_point}});
    rep.checks.push_back(check_at_most("ode_q" + std::to_string(q), worst, 1e-8));
    rep.checks.push_back(check_at_most("survival_identity_q" + std::to_string(q), fixed_point, 1e-12));
  }
  rep.seconds = elapsed_since(t0);
  return rep;
}

inline ExperimentReport run_length_series(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rep = make_report("length-series", spec);
  const double lam = spec.lambda;
  SeriesPolicy fast, slow;
  slow.fast_path = false;
  if (spec.prec_bits) slow.fixed_bits = spec.prec_bits;
  double worst = 0.0;
  for (double x : {0.5, 1.0, 2.0}) {
    const double pdf_b = length_pdf_bessel(lam, x), surv_b = length_survival_bessel(lam, x);
    for (const auto* pol : {&fast, &slow}) {
      const double dp = std::abs(length_pdf(0.5, lam, x, *pol) - pdf_b);
      const double ds = std::abs(1.0 - length_cdf(0.5, lam, x, *pol) - surv_b);
      worst = std::max({worst, dp, ds});
      rep.table.push_back({{"x", x},
                           {"path", pol == &fast ? "double" : "mpfr"},
                           {"pdf_error", dp},
                           {"survival_error", ds}});
    }
  }
  rep.checks.push_back(check_at_most("series_vs_bessel", worst, 1e-8));
  rep.seconds = elapsed_since(t0);
  return rep;
}

inline ExperimentReport run_length_tail(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rep = make_report("length-tail", spec);
  const double lam = spec.lambda;
  const double r_half = length_survival_bessel(lam, 50.0) / length_tail(0.5, lam, 50.0);
  rep.table.push_back({{"q", 0.5}, {"x", 50.0}, {"ratio", r_half}});
  auto c = check_at_most("ratio_q_half_x50", std::abs(r_half - 1.0), 0.1);
  c.details["ratio"] = r_half;
  rep.checks.push_back(c);
  SeriesPolicy policy;
  if (spec.prec_bits) policy.fixed_bits = spec.prec_bits;
  const double q = 2.0 / 3.0;
  LengthSeries series(q, lam, 50.0, policy);
  std::vector<double> gaps;
  for (double x : {10.0, 30.0, 50.0}) {
    const double r = (1.0 - series.cdf(x)) / length_tail(q, lam, x);
    gaps.push_back(std::abs(r - 1.0));
    rep.table.push_back({{"q", q}, {"x", x}, {"ratio", r}});
  }
  rep.checks.push_back(check_true("trend_q_two_thirds", gaps[0] > gaps[1] && gaps[1] > gaps[2],
                                  {{"gaps", gaps}, {"bits", series.bits()}}));
  rep.seconds = elapsed_since(t0);
  return rep;
}

inline ExperimentReport run_size_exact(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rep = make_report("size-exact", spec);
  for (auto [num, den] : {std::pair{1L, 2L}, std::pair{2L, 3L}}) {
    const auto oracle = size_pmf_oracle(igw_pmf_exact(num, den, 30), 30);
    bool equal = true;
    mpq_class sum = 0;
    bool sums_ok = true;
    for (long n = 1; n <= 30; ++n) {
      const mpq_class a = size_pmf_exact(num, den, n);
      equal = equal && a == oracle[n];
      sum += a;
      sums_ok = sums_ok && sum == size_cdf_exact(num, den, double(n));
    }
    const std::string tag = std::to_string(num) + "/" + std::to_string(den);
    rep.checks.push_back(check_true("oracle_equality_q" + tag, equal, {{"n_max", 30}}));
    rep.checks.push_back(check_true("cdf_partial_sums_q" + tag, sums_ok));
  }
  const bool spots = size_pmf_exact(1, 2, 1) == mpq_class(1, 2) && size_pmf_exact(1, 2, 2) == 0 &&
                     size_pmf_exact(1, 2, 3) == mpq_class(1, 8);
  rep.checks.push_back(check_true("spot_values_q1/2", spots,
                                  {{"alpha1", size_pmf_exact(1, 2, 1).get_str()},
                                   {"alpha2", size_pmf_exact(1, 2, 2).get_str()},
                                   {"alpha3", size_pmf_exact(1, 2, 3).get_str()}}));
  rep.seconds = elapsed_since(t0);
  return rep;
}

inline ExperimentReport run_size_tail(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rep = make_report("size-tail", spec);
  const mpq_class tail = 1 - size_cdf_exact(1, 2, 1000.0);
  const double ratio = tail.get_d() / size_tail(0.5, 1000.0);
  rep.table.push_back({{"x", 1000}, {"exact_tail", tail.get_d()}, {"asymptotic", size_tail(0.5, 1000.0)}, {"ratio", ratio}});
  rep.checks.push_back(check_at_most("ratio_x1000", std::abs(ratio - 1.0), 0.1));
  rep.seconds = elapsed_since(t0);
  return rep;
}

inline ExperimentReport run_lagrange(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rep = make_report("lagrange", spec);
  const long catalan[] = {1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796};
  const auto exact = lagrange_w_coeffs_exact(1, 2, 10);
  const auto approx = lagrange_w_coeffs(0.5, 10);
  bool ok = true;
  double rel = 0.0;
  for (int n = 0; n < 10; ++n) {
    const long signed_c = n % 2 ? -catalan[n] : catalan[n];
    ok = ok && exact[n] == signed_c;
    rel = std::max(rel, std::abs(approx[n] / double(signed_c) - 1.0));
  }
  rep.checks.push_back(check_true("signed_catalan_exact", ok));
  rep.checks.push_back(check_at_most("signed_catalan_double", rel, 1e-14));
  for (double q : {0.5, 2.0 / 3.0, 0.9}) {
    double worst = 0.0;
    for (double z : {-0.1, -0.05, 0.05, 0.1}) worst = std::max(worst, lagrange_round_trip_residual(q, z));
    rep.table.push_back({{"q", q}, {"residual", worst}});
    rep.checks.push_back(check_at_most("round_trip_q" + std::to_string(q), worst, 1e-10));
  }
  rep.seconds = elapsed_since(t0);
  return rep;
}

// ---------------------------------------------------------------- registry

inline ExperimentSpec default_spec(const std::string& name) {
  ExperimentSpec s;
  s.name = name;
  if (name == "verify-height") {
    s.replicates = 200000;
  } else if (name == "verify-length") {
    s.replicates = 200000;
    s.tolerance = 0.012;
  } else if (name == "verify-size") {
    s.seeds = 5;
  } else if (name == "invariance") {
    s.dist = "igw:2/3";
    s.phi = "length";
    s.p_targets = {0.5};
    s.seeds = 5;
    s.tolerance = 0.02;
  } else if (name == "uniqueness") {
    s.dist = "zipf:1.5";
    s.phi = "length";
    s.p_targets = {0.5};
    s.replicates = 20000;
    s.seeds = 5;
  } else if (name == "thinning") {
    s.dist = "binary";
    s.p_targets = {0.5};
    s.seeds = 5;
  } else if (name == "attractor-gf") {
    s.dist = "zipf:1.5";
    s.p_targets = {1e-1, 1e-2, 1e-3, 1e-4};
    s.tolerance = 0.02;
  } else if (name == "attractor-mc") {
    s.dist = "geometric";
    s.phi = "horton";
    s.replicates = 150000;
    s.tolerance = 0.02;
  } else if (name == "coloring") {
    s.dist = "binary";
    s.p_targets = {0.5};
    s.tolerance = 0.05;
  } else if (name == "semigroup") {
    s.replicates = 1000;
    s.thresholds = {0.3, 0.3};
  }
  return s;
}

inline const std::map<std::string, std::function<ExperimentReport(const ExperimentSpec&)>>& experiment_registry() {
  static const std::map<std::string, std::function<ExperimentReport(const ExperimentSpec&)>> r{
      {"verify-height", run_verify_height},
      {"verify-length", run_verify_length},
      {"verify-size", run_verify_size},
      {"invariance", run_invariance},
      {"uniqueness", run_uniqueness_falsification},
      {"thinning", run_thinning},
      {"attractor-gf", run_attractor_gf},
      {"attractor-mc", run_attractor_mc},
      {"coloring", run_coloring},
      {"semigroup", run_semigroup},
      {"height-ode", run_height_ode},
      {"length-series", run_length_series},
      {"length-tail", run_length_tail},
      {"size-exact", run_size_exact},
      {"size-tail", run_size_tail},
      {"lagrange", run_lagrange},
  };
  return r;
}

inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
  const auto& r = experiment_registry();
  auto it = r.find(spec.name);
  if (it == r.end()) throw std::invalid_argument("unknown experiment: " + spec.name);
  auto rep = it->second(spec);
  rep.write(spec.out_dir);
  return rep;
}

}  // namespace igw
