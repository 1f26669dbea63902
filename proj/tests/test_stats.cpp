#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "igw/analytics.hpp"
#include "igw/pruning.hpp"
#include "igw/sampler.hpp"
#include "igw/stats.hpp"

using namespace igw;

namespace {

std::vector<double> exp_sample(std::uint64_t seed, int n, double rate = 1.0) {
  Stream s(seed, 0, substream::auxiliary);
  std::vector<double> x(n);
  for (auto& v : x) v = s.exponential(rate);
  std::sort(x.begin(), x.end());
  return x;
}

double exp_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }

SampleConfig config(std::uint64_t seed, std::uint32_t rep, std::optional<double> lambda = {}) {
  SampleConfig c;
  c.seed = seed;
  c.replicate = rep;
  c.lambda = lambda;
  return c;
}

}  // namespace

TEST(Ks, KolmogorovTail) {
  EXPECT_NEAR(kolmogorov_tail(1.36), 0.0495, 5e-4);
  EXPECT_NEAR(kolmogorov_tail(1.63), 0.0098, 5e-4);
  EXPECT_EQ(kolmogorov_tail(0.0), 1.0);
}

TEST(Ks, NullCalibration) {
  const int n = 100000, seeds = 200;
  int small = 0;
  for (int s = 0; s < seeds; ++s) small += ks_statistic(exp_sample(s, n), exp_cdf) <= 1.36 / std::sqrt(double(n));
  // 95% expected; 0.92 leaves three standard deviations of seed noise.
  EXPECT_GE(double(small) / seeds, 0.92);
}

TEST(Ks, ConstantSamples) {
  const double c = 0.8;
  const std::vector<double> x(500, c);
  EXPECT_NEAR(ks_statistic(x, exp_cdf), std::max(exp_cdf(c), 1.0 - exp_cdf(c)), 1e-15);
}

TEST(Ks, CensoredRange) {
  // Drop everything above 3 but keep the total count: inside [0, 3] the statistic is unaffected.
  const auto x = exp_sample(7, 20000);
  const std::vector<double> kept(x.begin(), std::upper_bound(x.begin(), x.end(), 3.0));
  const double full = ks_statistic(x, exp_cdf, 0, 0.0, 3.0);
  EXPECT_DOUBLE_EQ(ks_statistic(kept, exp_cdf, x.size(), 0.0, 3.0), full);
  EXPECT_LE(full, ks_statistic(x, exp_cdf) + 1e-15);
}

TEST(Ks, Errors) {
  const auto x = exp_sample(8, 200);
  EXPECT_THROW(ks_statistic(x, exp_cdf, 0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ks_statistic(std::vector<double>(x.begin(), x.begin() + 50), exp_cdf), std::invalid_argument);
  auto unsorted = x;
  std::swap(unsorted[0], unsorted[1]);
  if (unsorted[0] != unsorted[1]) {
    EXPECT_THROW(ks_statistic(unsorted, exp_cdf), std::invalid_argument);
  }
}

TEST(ChiSquare, PerfectFitIsZero) {
  const std::vector<double> p{0.5, 0.25, 0.125, 0.125};
  std::vector<double> obs;
  for (double v : p) obs.push_back(v * 1000);
  const auto r = chi_square_pmf(obs, p, 1000);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.dof, 3);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(ChiSquare, MergingKeepsMass) {
  std::vector<double> p(40), obs(40, 1.0);
  double s = 0.0;
  for (int k = 0; k < 40; ++k) s += p[k] = std::pow(0.5, k + 1);
  p.back() += 1.0 - s;
  const double n = 200;
  const auto r = chi_square_pmf(obs, p, n);
  double e = 0.0, o = 0.0;
  for (double v : r.expected) {
    EXPECT_GE(v, 5.0);
    e += v;
  }
  for (double v : r.observed) o += v;
  EXPECT_NEAR(e, n, 1e-9);
  EXPECT_DOUBLE_EQ(o, 40.0);
  EXPECT_EQ(r.dof, int(r.expected.size()) - 1);
}

TEST(ChiSquare, Errors) {
  EXPECT_THROW(chi_square_pmf({1, 2}, {0.5, 0.5, 0.0}, 3), std::invalid_argument);
  EXPECT_THROW(chi_square_pmf({1, 2}, {0.6, 0.6}, 3), std::invalid_argument);
  EXPECT_THROW(chi_square_pmf({1, 2}, {0.5, 0.5}, 4), std::invalid_argument);
}

TEST(ChiSquare, NullCalibrationAndPower) {
  const auto half = OffspringDistribution::igw(0.5);
  const auto twothirds = OffspringDistribution::igw(2.0 / 3.0);
  const int K = 30, n = 100000, seeds = 40;
  std::vector<double> p_half(K + 1), p_23(K + 1);
  double t1 = 1.0, t2 = 1.0;
  for (int k = 0; k < K; ++k) {
    t1 -= p_half[k] = half.pmf(k);
    t2 -= p_23[k] = twothirds.pmf(k);
  }
  p_half[K] = t1;
  p_23[K] = t2;
  int accepted = 0, rejected = 0;
  for (int s = 0; s < seeds; ++s) {
    Stream rng(100 + s, 0, substream::auxiliary);
    std::vector<double> obs(K + 1, 0.0);
    for (int i = 0; i < n; ++i) obs[std::min<std::uint64_t>(sample_offspring(half, rng), K)] += 1.0;
    accepted += chi_square_pmf(obs, p_half, n).p_value > 0.01;
    rejected += chi_square_pmf(obs, p_23, n).p_value <= 0.01;
  }
  EXPECT_GE(accepted, 38);
  EXPECT_EQ(rejected, seeds);
}

TEST(Rate, ExponentialSample) {
  const auto x = exp_sample(9, 10000, 2.0);
  const auto f = fit_exponential_rate(x);
  EXPECT_LE(f.lower, 2.0);
  EXPECT_GE(f.upper, 2.0);
  EXPECT_FALSE(f.degenerate);
  double sum = 0.0;
  for (double v : x) sum += v;
  const auto g = fit_exponential_rate(x.size(), sum);
  EXPECT_DOUBLE_EQ(g.rate, f.rate);
  EXPECT_DOUBLE_EQ(g.lower, f.lower);
}

TEST(Rate, IntervalCoverage) {
  int covered = 0;
  const int seeds = 400;
  for (int s = 0; s < seeds; ++s) {
    const auto f = fit_exponential_rate(exp_sample(1000 + s, 200, 3.0));
    covered += f.lower <= 3.0 && 3.0 <= f.upper;
  }
  EXPECT_NEAR(double(covered) / seeds, 0.95, 0.035);
}

TEST(Rate, PrunedIgwEdges) {
  // Height pruning of IGW(1/2, 1) at t = 2 keeps p_t = 1/2; edges are Exp(lambda p_t^{(1-q)/q}) = Exp(1/2).
  const double t = 2.0;
  ASSERT_NEAR(height_survival_pt(0.5, 1.0, t), 0.5, 1e-15);
  const auto d = OffspringDistribution::igw(0.5);
  std::vector<double> lengths;
  for (std::uint32_t r = 0; r < 60000; ++r) {
    const auto s = sample_metric(d, config(21, r, 1.0));
    if (!s.tree) continue;
    const auto pruned = gdp_prune(*s.tree, PhiFunctional::height(), t);
    for (Vertex v = 1; v < pruned.tree.vertex_count(); ++v) lengths.push_back(pruned.tree.length(v));
  }
  const auto f = fit_exponential_rate(lengths);
  EXPECT_NEAR(f.rate, 0.5, 0.01);
}

TEST(Rate, DegenerateAndErrors) {
  EXPECT_TRUE(fit_exponential_rate(std::vector<double>(150, 1.0)).degenerate);
  EXPECT_THROW(fit_exponential_rate(std::vector<double>(50, 1.0)), std::invalid_argument);
  std::vector<double> bad(150, 1.0);
  bad[3] = 0.0;
  EXPECT_THROW(fit_exponential_rate(bad), std::invalid_argument);
}

TEST(Shapes, IdenticalInput) {
  const auto t = CombinatorialTree::from_parents({no_vertex, 0, 1, 1});
  const auto f = shape_frequency(std::vector<CombinatorialTree>(10, t));
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f.begin()->first, canonical_code(t));
  EXPECT_EQ(f.begin()->second, 1.0);
}

TEST(Shapes, IgwHalfFrequencies) {
  const auto d = OffspringDistribution::igw(0.5);
  ShapeCounter a(5), b(5);
  const int n = 100000;
  for (std::uint32_t r = 0; r < std::uint32_t(n); ++r) {
    const auto s = sample_shape(d, config(22, r));
    (r % 2 ? a : b).add(s.tree ? *s.tree : CombinatorialTree::from_parents({no_vertex, 0, 1, 1, 1, 1, 1, 1}));
  }
  a.merge(b);
  EXPECT_EQ(a.total(), std::size_t(n));
  const auto f = a.frequencies();
  const auto shapes = small_shapes();
  EXPECT_NEAR(f.at(canonical_code(shapes[0].tree)), 0.5, 0.005);
  EXPECT_NEAR(f.at(canonical_code(shapes[1].tree)), size_pmf_exact(1, 2, 3).get_d(), 0.005);
  double total = 0.0;
  for (const auto& [k, v] : f) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_GT(a.count("large"), 0u);
}

TEST(Verdicts, Majority) {
  EXPECT_TRUE(majority({true, true, false}));
  EXPECT_FALSE(majority({true, false}));
  EXPECT_FALSE(majority({}));
  EXPECT_TRUE(majority({true, true, true, false, false}));
}

TEST(Report, Json) {
  GofReport r;
  r.test = "ks";
  r.statistic = 0.01;
  r.sample_size = 1000;
  r.threshold = 0.043;
  r.pass = true;
  r.range = std::pair{0.0, 5.0};
  const auto j = r.to_json();
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["range"][1], 5.0);
  EXPECT_FALSE(j.contains("p_value"));
}
