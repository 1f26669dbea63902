#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace igw {

using Vertex = std::uint32_t;
inline constexpr Vertex no_vertex = std::numeric_limits<Vertex>::max();

namespace detail {

// Breadth-first relabelling of a parent array. Returns new -> old map; siblings
// keep their relative order of original index.
inline std::vector<Vertex> bfs_order(const std::vector<Vertex>& parent) {
  const std::size_t n = parent.size();
  if (n == 0) throw std::invalid_argument("tree needs a root vertex");
  if (parent[0] != no_vertex) throw std::invalid_argument("vertex 0 must be the root");
  std::vector<std::uint32_t> start(n + 1, 0);
  for (std::size_t v = 1; v < n; ++v) {
    if (parent[v] >= n || parent[v] == v)
      throw std::invalid_argument("bad parent index at vertex " + std::to_string(v));
    ++start[parent[v] + 1];
  }
  for (std::size_t i = 0; i < n; ++i) start[i + 1] += start[i];
  std::vector<Vertex> kids(n > 0 ? n - 1 : 0);
  std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
  for (std::size_t v = 1; v < n; ++v) kids[fill[parent[v]]++] = Vertex(v);
  std::vector<Vertex> order;
  order.reserve(n);
  order.push_back(0);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const Vertex u = order[head];
    for (std::uint32_t i = start[u]; i < start[u + 1]; ++i) order.push_back(kids[i]);
  }
  if (order.size() != n) throw std::invalid_argument("parent array is not a tree rooted at 0");
  return order;
}

}  // namespace detail

// Rooted unordered tree stored in breadth-first order: vertex 0 is the root and
// the children of each vertex occupy a contiguous index range.
class CombinatorialTree {
 public:
  CombinatorialTree() : parent_{no_vertex}, first_{1}, count_{0} {}

  static CombinatorialTree from_parents(const std::vector<Vertex>& parent) {
    return from_parents(parent, detail::bfs_order(parent));
  }

  std::size_t vertex_count() const { return parent_.size(); }
  std::size_t edge_count() const { return parent_.size() - 1; }
  bool empty() const { return parent_.size() == 1; }

  Vertex parent(Vertex v) const { return parent_[v]; }
  std::uint32_t child_count(Vertex v) const { return count_[v]; }
  Vertex first_child(Vertex v) const { return first_[v]; }
  Vertex child(Vertex v, std::uint32_t i) const { return first_[v] + i; }
  bool is_leaf(Vertex v) const { return v != 0 && count_[v] == 0; }

  bool is_planted() const { return empty() || count_[0] == 1; }
  bool is_reduced() const {
    for (std::size_t v = 1; v < count_.size(); ++v)
      if (count_[v] == 1) return false;
    return true;
  }

  const std::vector<Vertex>& parents() const { return parent_; }

  friend bool operator==(const CombinatorialTree&, const CombinatorialTree&) = default;

 private:
  friend class MetricTree;

  static CombinatorialTree from_parents(const std::vector<Vertex>& parent,
                                        const std::vector<Vertex>& order) {
    const std::size_t n = parent.size();
    std::vector<Vertex> label(n);
    for (std::size_t i = 0; i < n; ++i) label[order[i]] = Vertex(i);
    CombinatorialTree t;
    t.parent_.assign(n, no_vertex);
    t.count_.assign(n, 0);
    t.first_.assign(n, Vertex(n));
    for (std::size_t i = 1; i < n; ++i) {
      const Vertex p = label[parent[order[i]]];
      t.parent_[i] = p;
      if (t.count_[p]++ == 0) t.first_[p] = Vertex(i);
    }
    return t;
  }

  std::vector<Vertex> parent_;
  std::vector<Vertex> first_;
  std::vector<std::uint32_t> count_;
};

// CombinatorialTree with a positive length on the edge above every non-root vertex.
class MetricTree {
 public:
  MetricTree() : length_{0.0} {}

  static MetricTree from_parents(const std::vector<Vertex>& parent,
                                 const std::vector<double>& length) {
    if (length.size() != parent.size())
      throw std::invalid_argument("parent and length arrays differ in size");
    const auto order = detail::bfs_order(parent);
    MetricTree t;
    t.shape_ = CombinatorialTree::from_parents(parent, order);
    t.length_.assign(parent.size(), 0.0);
    for (std::size_t i = 1; i < parent.size(); ++i) {
      const double len = length[order[i]];
      if (!(len > 0.0) || !std::isfinite(len))
        throw std::invalid_argument("edge lengths must be positive and finite");
      t.length_[i] = len;
    }
    return t;
  }

  const CombinatorialTree& shape() const { return shape_; }
  std::size_t vertex_count() const { return shape_.vertex_count(); }
  std::size_t edge_count() const { return shape_.edge_count(); }
  bool empty() const { return shape_.empty(); }
  Vertex parent(Vertex v) const { return shape_.parent(v); }
  std::uint32_t child_count(Vertex v) const { return shape_.child_count(v); }
  Vertex first_child(Vertex v) const { return shape_.first_child(v); }
  Vertex child(Vertex v, std::uint32_t i) const { return shape_.child(v, i); }
  bool is_leaf(Vertex v) const { return shape_.is_leaf(v); }
  bool is_planted() const { return shape_.is_planted(); }
  bool is_reduced() const { return shape_.is_reduced(); }
  double length(Vertex v) const { return length_[v]; }
  const std::vector<double>& lengths() const { return length_; }
  const std::vector<Vertex>& parents() const { return shape_.parents(); }

  friend bool operator==(const MetricTree&, const MetricTree&) = default;

 private:
  CombinatorialTree shape_;
  std::vector<double> length_;
};

inline const CombinatorialTree& shape(const MetricTree& t) { return t.shape(); }
inline const CombinatorialTree& shape(const CombinatorialTree& t) { return t; }

inline std::size_t edge_count(const CombinatorialTree& t) { return t.edge_count(); }
inline std::size_t edge_count(const MetricTree& t) { return t.edge_count(); }

inline std::size_t leaf_count(const CombinatorialTree& t) {
  std::size_t n = 0;
  for (Vertex v = 1; v < t.vertex_count(); ++v) n += t.child_count(v) == 0;
  return n;
}
inline std::size_t leaf_count(const MetricTree& t) { return leaf_count(t.shape()); }

// Per-vertex height of the stemless subtree at v. Children are visited in index
// order so every caller sees the same rounding.
inline std::vector<double> subtree_heights(const MetricTree& t) {
  std::vector<double> h(t.vertex_count(), 0.0);
  for (Vertex v = Vertex(t.vertex_count()); v-- > 0;) {
    double m = 0.0;
    for (std::uint32_t i = 0; i < t.child_count(v); ++i) {
      const Vertex c = t.child(v, i);
      m = std::max(m, t.length(c) + h[c]);
    }
    h[v] = m;
  }
  return h;
}

inline std::vector<double> subtree_lengths(const MetricTree& t) {
  std::vector<double> s(t.vertex_count(), 0.0);
  for (Vertex v = Vertex(t.vertex_count()); v-- > 0;) {
    double acc = 0.0;
    for (std::uint32_t i = 0; i < t.child_count(v); ++i) {
      const Vertex c = t.child(v, i);
      acc += t.length(c) + s[c];
    }
    s[v] = acc;
  }
  return s;
}

inline double tree_height(const MetricTree& t) { return subtree_heights(t)[0]; }
inline double tree_length(const MetricTree& t) { return subtree_lengths(t)[0]; }

// Strahler order of the subtree hanging from each vertex (leaf = 1). The root
// uses the same rule, so a planted root inherits the order of its only child.
inline std::vector<std::uint32_t> strahler_orders(const CombinatorialTree& t) {
  std::vector<std::uint32_t> s(t.vertex_count(), 0);
  for (Vertex v = Vertex(t.vertex_count()); v-- > 0;) {
    const std::uint32_t k = t.child_count(v);
    if (k == 0) {
      s[v] = v == 0 ? 0 : 1;
      continue;
    }
    std::uint32_t best = 0, ties = 0;
    for (std::uint32_t i = 0; i < k; ++i) {
      const std::uint32_t o = s[t.child(v, i)];
      if (o > best) {
        best = o;
        ties = 1;
      } else if (o == best) {
        ++ties;
      }
    }
    s[v] = ties >= 2 ? best + 1 : best;
  }
  return s;
}

inline std::uint32_t horton_strahler_order(const CombinatorialTree& t) {
  return strahler_orders(t)[0];
}
inline std::uint32_t horton_strahler_order(const MetricTree& t) {
  return horton_strahler_order(t.shape());
}

namespace detail {

// Vertices kept by series reduction and the summed length of each merged chain.
inline std::pair<std::vector<Vertex>, std::vector<double>> reduce_chains(
    const CombinatorialTree& t, const std::vector<double>* length) {
  const std::size_t n = t.vertex_count();
  std::vector<Vertex> image(n, no_vertex);
  std::vector<double> carry(n, 0.0), new_length;
  std::vector<Vertex> parents{no_vertex};
  new_length.push_back(0.0);
  image[0] = 0;
  std::vector<Vertex> anchor(n, 0);
  for (Vertex v = 1; v < n; ++v) {
    const Vertex p = t.parent(v);
    const bool parent_kept = p == 0 || t.child_count(p) != 1;
    const double above = parent_kept ? 0.0 : carry[p];
    anchor[v] = parent_kept ? image[p] : anchor[p];
    const double len = length ? (*length)[v] : 1.0;
    if (t.child_count(v) == 1) {
      carry[v] = above + len;
      continue;
    }
    image[v] = Vertex(parents.size());
    parents.push_back(anchor[v]);
    new_length.push_back(above + len);
  }
  return {std::move(parents), std::move(new_length)};
}

}  // namespace detail

inline MetricTree series_reduce(const MetricTree& t) {
  if (t.is_reduced()) return t;
  auto [p, len] = detail::reduce_chains(t.shape(), &t.lengths());
  return MetricTree::from_parents(p, len);
}

inline CombinatorialTree series_reduce(const CombinatorialTree& t) {
  if (t.is_reduced()) return t;
  auto [p, len] = detail::reduce_chains(t, nullptr);
  return CombinatorialTree::from_parents(p);
}

// A point on the edge above `vertex`, `offset` measured from the parent end.
// offset == length(vertex) is the vertex itself; the root is (0, 0).
struct TreePoint {
  Vertex vertex = 0;
  double offset = 0.0;

  static TreePoint at_vertex(const MetricTree& t, Vertex v) {
    return {v, v == 0 ? 0.0 : t.length(v)};
  }
  static TreePoint on_edge(Vertex v, double offset) { return {v, offset}; }
};

// Subtree of points descending from x, rooted at x. An interior point becomes
// the root of a planted tree whose stem is the rest of the edge.
inline MetricTree descendant_subtree(const MetricTree& t, const TreePoint& x) {
  if (x.vertex >= t.vertex_count()) throw std::out_of_range("point outside tree: bad vertex");
  const double full = x.vertex == 0 ? 0.0 : t.length(x.vertex);
  if (!(x.offset >= 0.0) || x.offset > full)
    throw std::out_of_range("point outside tree: offset not on edge");
  if (x.vertex == 0) return t;
  if (x.offset == 0.0) {
    // The parent-side endpoint is the parent vertex; its subtree includes siblings.
    const Vertex p = t.parent(x.vertex);
    return descendant_subtree(t, TreePoint::at_vertex(t, p));
  }
  const bool interior = x.offset < full;
  std::vector<Vertex> parents{no_vertex};
  std::vector<double> lengths{0.0};
  std::vector<Vertex> queue{x.vertex}, image{0};
  if (interior) {
    parents.push_back(0);
    lengths.push_back(full - x.offset);
    image[0] = 1;
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex u = queue[head];
    for (std::uint32_t i = 0; i < t.child_count(u); ++i) {
      const Vertex c = t.child(u, i);
      queue.push_back(c);
      image.push_back(Vertex(parents.size()));
      parents.push_back(image[head]);
      lengths.push_back(t.length(c));
    }
  }
  return MetricTree::from_parents(parents, lengths);
}

namespace detail {

// AHU codes bottom-up; siblings sorted by (edge count, code). With keep_all
// false, child codes are released once consumed.
inline std::vector<std::string> ahu_codes(const CombinatorialTree& t, bool keep_all) {
  const std::size_t n = t.vertex_count();
  std::vector<std::string> code(n);
  std::vector<std::size_t> edges(n, 0);
  std::vector<Vertex> kids;
  for (Vertex v = Vertex(n); v-- > 0;) {
    kids.clear();
    std::size_t e = 0;
    for (std::uint32_t i = 0; i < t.child_count(v); ++i) {
      kids.push_back(t.child(v, i));
      e += 1 + edges[t.child(v, i)];
    }
    edges[v] = e;
    std::sort(kids.begin(), kids.end(), [&](Vertex a, Vertex b) {
      if (edges[a] != edges[b]) return edges[a] < edges[b];
      return code[a] < code[b];
    });
    std::string s = "(";
    for (Vertex c : kids) {
      s += code[c];
      if (!keep_all) std::string().swap(code[c]);
    }
    s += ')';
    code[v] = std::move(s);
  }
  return code;
}

}  // namespace detail

inline std::vector<std::string> subtree_codes(const CombinatorialTree& t) {
  return detail::ahu_codes(t, true);
}

inline std::string canonical_code(const CombinatorialTree& t) {
  return std::move(detail::ahu_codes(t, false)[0]);
}
inline std::string canonical_code(const MetricTree& t) { return canonical_code(t.shape()); }

namespace detail {

struct IsoContext {
  const MetricTree& a;
  const MetricTree& b;
  const std::vector<std::string>& ca;
  const std::vector<std::string>& cb;
  double tol;

  bool match(Vertex u, Vertex v) const {
    if (ca[u] != cb[v]) return false;
    if (u != 0 && std::abs(a.length(u) - b.length(v)) > tol) return false;
    const std::uint32_t k = a.child_count(u);
    std::vector<Vertex> ka(k), kb(k);
    for (std::uint32_t i = 0; i < k; ++i) {
      ka[i] = a.child(u, i);
      kb[i] = b.child(v, i);
    }
    std::vector<bool> used(k, false);
    return assign(ka, kb, used, 0);
  }

  bool assign(const std::vector<Vertex>& ka, const std::vector<Vertex>& kb,
              std::vector<bool>& used, std::size_t i) const {
    if (i == ka.size()) return true;
    for (std::size_t j = 0; j < kb.size(); ++j) {
      if (used[j] || ca[ka[i]] != cb[kb[j]]) continue;
      if (!match(ka[i], kb[j])) continue;
      used[j] = true;
      if (assign(ka, kb, used, i + 1)) return true;
      used[j] = false;
    }
    return false;
  }
};

}  // namespace detail

// Isomorphism as unordered rooted trees with edge lengths equal within tol.
inline bool approx_isomorphic(const MetricTree& a, const MetricTree& b, double tol) {
  if (a.vertex_count() != b.vertex_count()) return false;
  const auto ca = subtree_codes(a.shape());
  const auto cb = subtree_codes(b.shape());
  return detail::IsoContext{a, b, ca, cb, tol}.match(0, 0);
}

}  // namespace igw
