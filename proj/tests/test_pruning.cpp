#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "igw/analytics.hpp"
#include "igw/newick.hpp"
#include "igw/pruning.hpp"
#include "igw/sampler.hpp"

using namespace igw;

namespace {

const MetricTree& cherry() {
  static const MetricTree t = from_newick("((:1,:3):1);");
  return t;
}

// Random reduced planted trees from IGW(1/2) with unit-rate lengths.
std::vector<MetricTree> random_trees(int count, std::uint64_t seed, std::uint64_t budget = 400,
                                     double q = 0.5) {
  const auto d = OffspringDistribution::igw(q);
  std::vector<MetricTree> out;
  for (std::uint32_t r = 0; int(out.size()) < count; ++r) {
    SampleConfig c;
    c.seed = seed;
    c.replicate = r;
    c.budget = budget;
    c.lambda = 1.0;
    auto s = sample_metric(d, c);
    if (s.tree) out.push_back(std::move(*s.tree));
  }
  return out;
}

std::function<bool(const MetricTree&)> at_least(const PhiFunctional& phi, double t) {
  return [phi, t](const MetricTree& x) { return phi.evaluate(x) >= t; };
}

}  // namespace

TEST(Gdp, ThresholdZeroIsIdentity) {
  for (const auto& name : {"height", "length", "leaves", "ord"})
    for (const auto& t : random_trees(50, 1)) {
      const auto r = gdp_prune(t, PhiFunctional::by_name(name), 0.0);
      ASSERT_TRUE(r.survived);
      ASSERT_EQ(r.tree, t);
      ASSERT_TRUE(r.cuts.empty());
    }
}

TEST(Gdp, ThresholdAboveHeightEmpties) {
  const auto t = from_newick("(:2);");
  const auto r = gdp_prune(t, PhiFunctional::height(), 3.0);
  EXPECT_FALSE(r.survived);
  EXPECT_TRUE(r.tree.empty());
}

TEST(Gdp, CherryLengthAndHeight) {
  for (const auto& phi : {PhiFunctional::length(), PhiFunctional::height()}) {
    const auto r = gdp_prune(cherry(), phi, 2.0);
    ASSERT_TRUE(r.survived);
    ASSERT_EQ(r.tree.edge_count(), 1u);
    EXPECT_DOUBLE_EQ(r.tree.length(1), 2.0);
    ASSERT_EQ(r.cuts.size(), 1u);
    EXPECT_DOUBLE_EQ(r.cuts[0].kept, 1.0);
  }
}

TEST(Gdp, ConstantLawKeepsWholeEdges) {
  const auto t = from_newick("(((:1,:2):1.5,:4):0.5);");
  const auto r = gdp_prune(t, PhiFunctional::leaves(), 2.0);
  EXPECT_TRUE(r.cuts.empty());
  ASSERT_EQ(r.tree.edge_count(), 1u);
  EXPECT_DOUBLE_EQ(r.tree.length(1), 2.0);
}

TEST(Gdp, NegativeThresholdThrows) {
  EXPECT_THROW(gdp_prune(cherry(), PhiFunctional::height(), -0.1), std::invalid_argument);
}

TEST(Gdp, OutputIsPlantedAndReduced) {
  for (const auto& name : {"height", "length", "leaves", "ord"})
    for (const auto& t : random_trees(100, 2)) {
      const auto r = gdp_prune(t, PhiFunctional::by_name(name), 1.0);
      ASSERT_EQ(r.survived, !r.tree.empty());
      if (r.survived) {
        ASSERT_TRUE(r.tree.is_planted());
        ASSERT_TRUE(r.tree.is_reduced());
      }
    }
}

TEST(Gdp, CutPointsLandOnThreshold) {
  for (const auto& phi : {PhiFunctional::height(), PhiFunctional::length()})
    for (const auto& t : random_trees(100, 3))
      for (double thr : {0.25, 1.0, 2.5}) {
        const auto val = phi.vertex_values(t);
        const auto r = gdp_prune(t, phi, thr);
        for (const auto& c : r.cuts) {
          const double len = t.length(c.vertex);
          ASSERT_LT(val[c.vertex], thr);
          ASSERT_GT(c.kept, 0.0);
          ASSERT_LE(c.kept, len);
          ASSERT_NEAR(val[c.vertex] + (len - c.kept), thr, 1e-12 * std::max(1.0, thr));
          const double d = cut_offset(val[c.vertex], thr, len);
          ASSERT_GE(val[c.vertex] + d, thr);
          ASSERT_LT(val[c.vertex] + std::nextafter(d, 0.0), thr);
        }
      }
}

TEST(Gdp, MonotoneInThreshold) {
  for (const auto& name : {"height", "length", "leaves", "ord"}) {
    const auto phi = PhiFunctional::by_name(name);
    for (const auto& t : random_trees(100, 4)) {
      const auto a = gdp_prune(t, phi, 0.5);
      const auto b = gdp_prune(t, phi, 1.5);
      for (Vertex v = 1; v < t.vertex_count(); ++v) ASSERT_LE(b.retained[v], a.retained[v]);
      if (!b.survived) continue;
      ASSERT_TRUE(a.survived);
      ASSERT_LE(tree_length(b.tree), tree_length(a.tree) + 1e-12);
      ASSERT_LE(tree_height(b.tree), tree_height(a.tree) + 1e-12);
      ASSERT_LE(leaf_count(b.tree), leaf_count(a.tree));
    }
  }
}

TEST(Phi, MonotoneUnderDescendants) {
  std::mt19937_64 g(5);
  for (const auto& name : {"height", "length", "leaves", "ord"}) {
    const auto phi = PhiFunctional::by_name(name);
    for (const auto& t : random_trees(50, 5)) {
      const double whole = phi.evaluate(t);
      for (int i = 0; i < 10; ++i) {
        const Vertex v = 1 + Vertex(g() % (t.vertex_count() - 1));
        const double off = std::uniform_real_distribution<double>(0.0, t.length(v))(g);
        ASSERT_LE(phi.evaluate(descendant_subtree(t, TreePoint::on_edge(v, off))), whole + 1e-12);
      }
    }
  }
}

TEST(Phi, AlongEdgeLaws) {
  std::mt19937_64 g(6);
  for (const auto& name : {"height", "length", "leaves", "ord"}) {
    const auto phi = PhiFunctional::by_name(name);
    for (const auto& t : random_trees(50, 6)) {
      const auto val = phi.vertex_values(t);
      for (Vertex v = 1; v < t.vertex_count(); ++v) {
        const double len = t.length(v);
        const double off = std::uniform_real_distribution<double>(0.01, 0.99)(g) * len;
        const double at = phi.evaluate(descendant_subtree(t, TreePoint::on_edge(v, off)));
        const double expected = phi.law() == EdgeLaw::additive ? val[v] + (len - off) : val[v];
        ASSERT_NEAR(at, expected, 1e-9 * std::max(1.0, expected)) << name;
      }
    }
  }
}

TEST(Horton, SmallShapes) {
  EXPECT_TRUE(horton_prune(from_newick("(:2);")).empty());
  const auto r = horton_prune(cherry());
  ASSERT_EQ(r.edge_count(), 1u);
  EXPECT_DOUBLE_EQ(r.length(1), 1.0);
}

TEST(Horton, OrderIsNumberOfPrunings) {
  for (const auto& t : random_trees(200, 7, 2000)) {
    const std::uint32_t k = horton_strahler_order(t);
    MetricTree cur = t;
    for (std::uint32_t i = 0; i + 1 < k; ++i) cur = horton_prune(cur);
    ASSERT_FALSE(cur.empty());
    ASSERT_TRUE(horton_prune(cur).empty());
  }
}

TEST(Horton, EqualsOrdPruningAtOne) {
  for (const auto& t : random_trees(200, 8, 2000)) {
    const auto a = horton_prune(t);
    const auto b = gdp_prune(t, PhiFunctional::horton_order(), 1.0).tree;
    ASSERT_EQ(canonical_code(a), canonical_code(b));
    ASSERT_EQ(canonical_code(horton_prune(t.shape())), canonical_code(a));
    ASSERT_TRUE(approx_isomorphic(a, b, 1e-12));
  }
}

TEST(Hereditary, AlwaysTrueIsIdentity) {
  for (const auto& t : random_trees(30, 9, 100)) {
    const auto r = hereditary_reduce(t, [](const MetricTree&) { return true; });
    ASSERT_EQ(r.tree, t);
  }
}

TEST(Hereditary, CherryMatchesGdp) {
  const auto a = hereditary_reduce(cherry(), at_least(PhiFunctional::height(), 2.0));
  const auto b = gdp_prune(cherry(), PhiFunctional::height(), 2.0);
  EXPECT_EQ(a.tree, b.tree);
}

TEST(Hereditary, BitForBitEqualToGdp) {
  for (const auto& name : {"height", "length", "leaves", "ord"}) {
    const auto phi = PhiFunctional::by_name(name);
    for (const auto& t : random_trees(60, 10, 80))
      for (double thr : {0.5, 1.0, 2.0, 3.7}) {
        const auto a = hereditary_reduce(t, at_least(phi, thr));
        const auto b = gdp_prune(t, phi, thr);
        ASSERT_EQ(a.tree, b.tree) << name << " " << thr << " " << to_newick(t);
        ASSERT_EQ(a.retained, b.retained);
      }
  }
}

TEST(Hereditary, CompositionOfReductions) {
  // T belongs to A' o A iff R_A(T) belongs to A'.
  const auto len = PhiFunctional::length();
  const auto first = at_least(len, 1.0);
  const auto second = at_least(len, 1.0);
  auto composed = [&](const MetricTree& x) { return second(hereditary_reduce(x, first, false).tree); };
  for (const auto& t : random_trees(100, 11, 30)) {
    const auto two_step = hereditary_reduce(hereditary_reduce(t, first).tree, second).tree;
    const auto one_step = hereditary_reduce(t, composed).tree;
    ASSERT_TRUE(approx_isomorphic(two_step, one_step, 1e-9)) << to_newick(t);
  }
}

TEST(Hereditary, ViolationIsReported) {
  auto few_leaves = [](const MetricTree& x) { return leaf_count(x) <= 1; };
  EXPECT_THROW(hereditary_reduce(cherry(), few_leaves), NonHereditaryError);
  Stream rng(12, 0, substream::auxiliary);
  EXPECT_TRUE(find_hereditary_violation(cherry(), few_leaves, rng, 200).has_value());
  for (const auto& t : random_trees(20, 12, 100))
    EXPECT_FALSE(find_hereditary_violation(t, at_least(PhiFunctional::height(), 1.0), rng, 200).has_value());
}

TEST(Coloring, ZeroProbabilityIsIdentity) {
  Stream rng(13, 0, substream::coloring);
  for (const auto& t : random_trees(50, 13)) ASSERT_EQ(bernoulli_color(t, 0.0, rng).tree, t);
}

TEST(Coloring, SingleEdgeSurvival) {
  const auto t = from_newick("(:1);");
  const int n = 100000;
  for (double p : {0.2, 0.7}) {
    Stream rng(14, 0, substream::coloring);
    int alive = 0;
    for (int i = 0; i < n; ++i) alive += bernoulli_color(t, p, rng).survived;
    EXPECT_NEAR(double(alive) / n, 1.0 - p, 0.01);
  }
}

TEST(Coloring, BinarySurvivalMatchesFixedPoint) {
  // Planted binary tree: s = (1-p)/2 + (1 - (1-s)^2)/2, so s = sqrt(1-p).
  const double p = 0.5, expected = std::sqrt(1.0 - p);
  EXPECT_NEAR(coloring_survival(OffspringDistribution::critical_binary(), p), expected, 1e-9);
  const auto d = OffspringDistribution::critical_binary();
  const int n = 50000;
  int alive = 0, total = 0;
  for (std::uint32_t r = 0; r < std::uint32_t(n); ++r) {
    SampleConfig c;
    c.seed = 15;
    c.replicate = r;
    c.lambda = 1.0;
    const auto s = sample_metric(d, c);
    if (!s.tree) continue;
    Stream rng(15, r, substream::coloring);
    const auto out = bernoulli_color(*s.tree, p, rng);
    alive += out.survived;
    ++total;
    if (out.survived) {
      ASSERT_TRUE(out.tree.is_planted());
      ASSERT_TRUE(out.tree.is_reduced());
      ASSERT_LE(leaf_count(out.tree), leaf_count(*s.tree));
    }
  }
  EXPECT_NEAR(double(alive) / total, expected, 0.01);
}

TEST(Coloring, BadProbabilityThrows) {
  Stream rng(16, 0);
  EXPECT_THROW(bernoulli_color(cherry(), 1.0, rng), std::domain_error);
  EXPECT_THROW(bernoulli_color(cherry(), -0.1, rng), std::domain_error);
}

TEST(Semigroup, HeightHolds) {
  for (const auto& t : random_trees(1000, 17))
    ASSERT_TRUE(semigroup_check(t, PhiFunctional::height(), 0.3, 0.3).equal) << to_newick(t);
}

TEST(Semigroup, OrdHoldsForIntegers) {
  for (const auto& t : random_trees(300, 18, 2000))
    for (double s : {1.0, 2.0})
      for (double t2 : {1.0, 2.0}) ASSERT_TRUE(semigroup_check(t, PhiFunctional::horton_order(), s, t2).equal);
}

TEST(Semigroup, LengthCounterexample) {
  std::ifstream in(std::string(IGW_FIXTURE_DIR) + "/semigroup_length_counterexample.nwk");
  ASSERT_TRUE(in);
  const auto trees = read_newick(in);
  ASSERT_EQ(trees.size(), 1u);
  const auto r = semigroup_check(trees[0], PhiFunctional::length(), 1.0, 1.0);
  EXPECT_FALSE(r.equal);
  EXPECT_TRUE(r.composed.empty());
  EXPECT_EQ(r.direct.edge_count(), 1u);
  EXPECT_TRUE(semigroup_check(trees[0], PhiFunctional::height(), 0.3, 0.3).equal);

  int found = 0;
  for (const auto& t : random_trees(500, 19)) found += !semigroup_check(t, PhiFunctional::length(), 1.0, 1.0).equal;
  EXPECT_GT(found, 0);
}
