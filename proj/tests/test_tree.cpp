#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "igw/newick.hpp"
#include "igw/pruning.hpp"
#include "igw/tree.hpp"

using namespace igw;

namespace {

// Pointer tree used as an independent reference.
struct Node {
  double len = 0.0;
  std::vector<std::unique_ptr<Node>> kids;
};

std::unique_ptr<Node> random_node(std::mt19937_64& g, int depth, bool reduced) {
  auto n = std::make_unique<Node>();
  n->len = std::uniform_real_distribution<double>(0.1, 3.0)(g);
  if (depth > 0) {
    const int r = std::uniform_int_distribution<int>(0, 5)(g);
    int k = r < 2 ? 0 : r - 1;
    if (!reduced && r == 2) k = 1;
    if (reduced && k == 1) k = 2;
    for (int i = 0; i < k; ++i) n->kids.push_back(random_node(g, depth - 1, reduced));
  }
  return n;
}

// Planted tree: the root has a single stem to `top`.
MetricTree to_metric(const Node& top, std::mt19937_64* shuffle = nullptr) {
  std::vector<Vertex> parent{no_vertex};
  std::vector<double> len{0.0};
  std::function<void(const Node&, Vertex)> walk = [&](const Node& n, Vertex p) {
    parent.push_back(p);
    len.push_back(n.len);
    const Vertex me = Vertex(parent.size() - 1);
    std::vector<const Node*> kids;
    for (const auto& c : n.kids) kids.push_back(c.get());
    if (shuffle) std::shuffle(kids.begin(), kids.end(), *shuffle);
    for (const Node* c : kids) walk(*c, me);
  };
  walk(top, 0);
  return MetricTree::from_parents(parent, len);
}

double ref_height(const Node& n) {
  double m = 0.0;
  for (const auto& c : n.kids) m = std::max(m, ref_height(*c));
  return n.len + m;
}

double ref_length(const Node& n) {
  double s = n.len;
  for (const auto& c : n.kids) s += ref_length(*c);
  return s;
}

// Relabels vertices 1..n-1 by a random permutation.
MetricTree permuted(const MetricTree& t, std::mt19937_64& g) {
  const std::size_t n = t.vertex_count();
  std::vector<Vertex> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin() + 1, perm.end(), g);
  std::vector<Vertex> parent(n);
  std::vector<double> len(n, 0.0);
  parent[0] = no_vertex;
  for (Vertex v = 1; v < n; ++v) {
    parent[perm[v]] = perm[t.parent(v)];
    len[perm[v]] = t.length(v);
  }
  return MetricTree::from_parents(parent, len);
}

MetricTree cherry() { return from_newick("((:1,:3):1);"); }

}  // namespace

TEST(Shape, EmptySingleEdgeCherry) {
  const MetricTree empty;
  EXPECT_TRUE(shape(empty).empty());
  EXPECT_EQ(edge_count(empty), 0u);
  EXPECT_EQ(leaf_count(empty), 0u);
  const auto edge = from_newick("(:2.5);");
  EXPECT_EQ(edge_count(shape(edge)), 1u);
  EXPECT_EQ(canonical_code(shape(edge)), canonical_code(from_newick("(:7);")));
  const auto c = cherry();
  EXPECT_EQ(canonical_code(shape(c)), canonical_code(from_newick("((:4,:5):6);")));
  EXPECT_TRUE(c.is_planted());
  EXPECT_TRUE(c.is_reduced());
}

TEST(Metric, HeightAndLength) {
  const MetricTree empty;
  EXPECT_EQ(tree_height(empty), 0.0);
  EXPECT_EQ(tree_length(empty), 0.0);
  const auto edge = from_newick("(:2);");
  EXPECT_EQ(tree_height(edge), 2.0);
  EXPECT_EQ(tree_length(edge), 2.0);
  EXPECT_EQ(tree_height(cherry()), 4.0);
  EXPECT_EQ(tree_length(cherry()), 5.0);
}

TEST(Counts, Cherry) {
  EXPECT_EQ(edge_count(from_newick("(:2);")), 1u);
  EXPECT_EQ(leaf_count(from_newick("(:2);")), 1u);
  EXPECT_EQ(edge_count(cherry()), 3u);
  EXPECT_EQ(leaf_count(cherry()), 2u);
}

TEST(Metric, MatchesPointerReference) {
  std::mt19937_64 g(11);
  for (int i = 0; i < 200; ++i) {
    const auto ref = random_node(g, 7, true);
    const auto t = to_metric(*ref);
    EXPECT_NEAR(tree_height(t), ref_height(*ref), 1e-12);
    EXPECT_NEAR(tree_length(t), ref_length(*ref), 1e-9);
  }
}

TEST(MetricTree, RejectsNonpositiveLengths) {
  EXPECT_THROW(MetricTree::from_parents({no_vertex, 0}, {0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(MetricTree::from_parents({no_vertex, 0}, {0.0, -1.0}), std::invalid_argument);
}

TEST(Order, Examples) {
  EXPECT_EQ(horton_strahler_order(MetricTree()), 0u);
  EXPECT_EQ(horton_strahler_order(from_newick("(:1);")), 1u);
  EXPECT_EQ(horton_strahler_order(cherry()), 2u);
  EXPECT_EQ(horton_strahler_order(from_newick("(((:1,:1):1,(:1,:1):1):1);")), 3u);
  EXPECT_EQ(horton_strahler_order(from_newick("(((:1,:1):1,:1,:1):1);")), 2u);
}

TEST(Order, IteratedPruningOracle) {
  std::mt19937_64 g(12);
  for (int i = 0; i < 300; ++i) {
    const auto t = to_metric(*random_node(g, 8, true));
    auto s = t.shape();
    std::uint32_t k = 0;
    while (!s.empty()) {
      s = horton_prune(s);
      ++k;
    }
    ASSERT_EQ(horton_strahler_order(t), k);
    if (!t.empty()) {
      EXPECT_EQ(horton_strahler_order(t), 1 + horton_strahler_order(horton_prune(t)));
    }
  }
}

TEST(SeriesReduce, Examples) {
  const auto chain = from_newick("((:2):1);");
  EXPECT_FALSE(chain.is_reduced());
  const auto r = series_reduce(chain);
  EXPECT_EQ(edge_count(r), 1u);
  EXPECT_EQ(r.length(1), 3.0);
  EXPECT_EQ(to_newick(series_reduce(cherry())), to_newick(cherry()));
  EXPECT_TRUE(series_reduce(MetricTree()).empty());
}

TEST(SeriesReduce, IdempotentAndPreservesMetrics) {
  std::mt19937_64 g(13);
  for (int i = 0; i < 300; ++i) {
    const auto ref = random_node(g, 8, false);
    const auto t = to_metric(*ref);
    const auto r = series_reduce(t);
    EXPECT_TRUE(r.is_reduced());
    EXPECT_EQ(to_newick(series_reduce(r)), to_newick(r));
    EXPECT_NEAR(tree_length(r), tree_length(t), 1e-9);
    EXPECT_NEAR(tree_height(r), tree_height(t), 1e-12);
    EXPECT_EQ(leaf_count(r), leaf_count(t));
  }
}

TEST(Descendant, Examples) {
  const auto c = cherry();
  EXPECT_EQ(to_newick(descendant_subtree(c, TreePoint::at_vertex(c, 0))), to_newick(c));
  Vertex long_leaf = 0, short_leaf = 0;
  for (Vertex v = 1; v < c.vertex_count(); ++v)
    if (c.is_leaf(v)) {
      (c.length(v) == 3.0 ? long_leaf : short_leaf) = v;
    }
  EXPECT_TRUE(descendant_subtree(c, TreePoint::at_vertex(c, long_leaf)).empty());
  const auto d = descendant_subtree(c, TreePoint::on_edge(long_leaf, 1.0));
  EXPECT_EQ(edge_count(d), 1u);
  EXPECT_EQ(tree_length(d), 2.0);
  EXPECT_THROW(descendant_subtree(c, TreePoint::on_edge(short_leaf, 1.5)), std::out_of_range);
  EXPECT_THROW(descendant_subtree(c, TreePoint::on_edge(99, 0.5)), std::out_of_range);
}

TEST(Descendant, LengthBound) {
  std::mt19937_64 g(14);
  for (int i = 0; i < 100; ++i) {
    const auto t = to_metric(*random_node(g, 6, true));
    const double total = tree_length(t);
    for (Vertex v = 1; v < t.vertex_count(); ++v) {
      const double off = std::uniform_real_distribution<double>(0.0, t.length(v))(g);
      const auto d = descendant_subtree(t, TreePoint::on_edge(v, off));
      EXPECT_LT(tree_length(d), total);
      EXPECT_TRUE(d.is_planted());
    }
    EXPECT_EQ(tree_length(descendant_subtree(t, TreePoint::at_vertex(t, 0))), total);
  }
}

TEST(Canonical, Examples) {
  EXPECT_EQ(canonical_code(from_newick("(((:1,:1):1,:1):1);")), canonical_code(from_newick("((:1,(:1,:1):1):1);")));
  EXPECT_NE(canonical_code(cherry()), canonical_code(from_newick("(:1);")));
}

TEST(Canonical, InvariantUnderSiblingPermutation) {
  std::mt19937_64 g(15);
  for (int i = 0; i < 300; ++i) {
    const auto ref = random_node(g, 8, true);
    const auto a = to_metric(*ref);
    const auto b = to_metric(*ref, &g);
    const auto c = permuted(a, g);
    EXPECT_EQ(canonical_code(a), canonical_code(b));
    EXPECT_EQ(canonical_code(a), canonical_code(c));
    EXPECT_EQ(to_newick(a), to_newick(b));
    EXPECT_TRUE(approx_isomorphic(a, c, 0.0));
  }
}

TEST(Canonical, DistinguishesNonIsomorphic) {
  const std::vector<std::string> shapes{"(:1);", "((:1,:1):1);", "((:1,:1,:1):1);", "(((:1,:1):1,:1):1);",
                                        "(((:1,:1):1,:1,:1):1);", "(((:1,:1):1,(:1,:1):1):1);"};
  for (std::size_t i = 0; i < shapes.size(); ++i)
    for (std::size_t j = 0; j < shapes.size(); ++j)
      EXPECT_EQ(canonical_code(from_newick(shapes[i])) == canonical_code(from_newick(shapes[j])), i == j);
}

TEST(Newick, Examples) {
  EXPECT_EQ(to_newick(from_newick("(:2);")), "(:2);");
  const auto c = from_newick("((:1,:3):1);");
  EXPECT_EQ(edge_count(c), 3u);
  EXPECT_EQ(c.length(1), 1.0);
  EXPECT_EQ(to_newick(c), "((:1,:3):1);");
  EXPECT_EQ(to_newick(MetricTree()), ";");
  EXPECT_TRUE(from_newick(";").empty());
}

TEST(Newick, ParseErrorsCarryPosition) {
  try {
    from_newick("((:1,:3):1");
    FAIL();
  } catch (const NewickError& e) {
    EXPECT_GT(e.position(), 0u);
  }
  EXPECT_THROW(from_newick("((:1,:x):1);"), NewickError);
  EXPECT_THROW(from_newick("((:1,:-3):1);"), std::exception);
}

TEST(Newick, RoundTrip) {
  std::mt19937_64 g(16);
  for (int i = 0; i < 300; ++i) {
    const auto t = to_metric(*random_node(g, 8, true), &g);
    const auto back = from_newick(to_newick(t));
    EXPECT_EQ(canonical_code(back), canonical_code(t));
    EXPECT_TRUE(approx_isomorphic(back, t, 0.0));
    EXPECT_NEAR(tree_length(back), tree_length(t), 1e-12 * tree_length(t));
  }
}

TEST(Newick, StreamWithComments) {
  std::istringstream in("# header\n(:1);\n((:1,:3):1);\n");
  const auto ts = read_newick(in);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(edge_count(ts[1]), 3u);
}

TEST(Json, RoundTrip) {
  std::mt19937_64 g(17);
  for (int i = 0; i < 100; ++i) {
    const auto t = to_metric(*random_node(g, 7, true));
    const auto back = tree_from_json(to_json(t));
    EXPECT_TRUE(approx_isomorphic(back, t, 0.0));
  }
  EXPECT_EQ(to_json(from_newick("(:2);"))["children"][0]["len"].get<double>(), 2.0);
}
