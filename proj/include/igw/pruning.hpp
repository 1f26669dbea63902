#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "igw/rng.hpp"
#include "igw/tree.hpp"

namespace igw {

// How phi extends to points inside an edge: additive in the distance to the
// lower vertex (height, length) or constant on the open edge (leaves, ord).
enum class EdgeLaw { additive, constant };

class PhiFunctional {
 public:
  // Computes the value at v from already computed child values. For the
  // additive law the value is phi of the stemless subtree at v; for the
  // constant law it is phi on the edge above v (phi(T) at the root).
  using Combine = std::function<double(const MetricTree&, Vertex, const std::vector<double>&)>;

  static PhiFunctional height() { return PhiFunctional("height", EdgeLaw::additive, Kind::height); }
  static PhiFunctional length() { return PhiFunctional("length", EdgeLaw::additive, Kind::length); }
  static PhiFunctional leaves() { return PhiFunctional("leaves", EdgeLaw::constant, Kind::leaves); }
  // Horton-Strahler order minus one.
  static PhiFunctional horton_order() { return PhiFunctional("ord", EdgeLaw::constant, Kind::ord); }
  static PhiFunctional custom(std::string name, EdgeLaw law, Combine combine) {
    PhiFunctional f(std::move(name), law, Kind::custom);
    f.combine_ = std::move(combine);
    return f;
  }

  static PhiFunctional by_name(const std::string& name) {
    if (name == "height") return height();
    if (name == "length") return length();
    if (name == "leaves") return leaves();
    if (name == "ord") return horton_order();
    throw std::invalid_argument("unknown phi: " + name);
  }

  const std::string& name() const { return name_; }
  EdgeLaw law() const { return law_; }

  std::vector<double> vertex_values(const MetricTree& t) const {
    switch (kind_) {
      case Kind::height: return subtree_heights(t);
      case Kind::length: return subtree_lengths(t);
      case Kind::leaves: {
        std::vector<double> v(t.vertex_count(), 0.0);
        for (Vertex u = Vertex(t.vertex_count()); u-- > 0;) {
          if (t.is_leaf(u)) {
            v[u] = 1.0;
            continue;
          }
          double s = 0.0;
          for (std::uint32_t i = 0; i < t.child_count(u); ++i) s += v[t.child(u, i)];
          v[u] = s;
        }
        return v;
      }
      case Kind::ord: {
        const auto s = strahler_orders(t.shape());
        std::vector<double> v(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) v[i] = s[i] > 0 ? double(s[i] - 1) : 0.0;
        return v;
      }
      case Kind::custom: {
        std::vector<double> v(t.vertex_count(), 0.0);
        for (Vertex u = Vertex(t.vertex_count()); u-- > 0;) v[u] = combine_(t, u, v);
        return v;
      }
    }
    return {};
  }

  double evaluate(const MetricTree& t) const { return vertex_values(t)[0]; }

 private:
  enum class Kind { height, length, leaves, ord, custom };
  PhiFunctional(std::string name, EdgeLaw law, Kind kind) : name_(std::move(name)), law_(law), kind_(kind) {}

  std::string name_;
  EdgeLaw law_;
  Kind kind_;
  Combine combine_;
};

struct CutRecord {
  Vertex vertex;  // edge above this vertex of the input tree
  double kept;    // retained length, measured from the parent end
};

struct PrunedResult {
  MetricTree tree;
  bool survived = false;
  std::vector<CutRecord> cuts;
  std::vector<double> retained;  // retained length of each input edge (0 = removed)
};

class NonHereditaryError : public std::runtime_error {
 public:
  NonHereditaryError(Vertex v, double offset)
      : std::runtime_error("predicate is not hereditary: descendant tree at vertex " + std::to_string(v) +
                           " (offset " + std::to_string(offset) + ") is kept below a removed point"),
        vertex(v),
        offset(offset) {}
  Vertex vertex;
  double offset;
};

namespace detail {

// Smallest double d in [0, hi] with pred(d), given pred(hi) and not pred(0).
template <class Pred>
double least_true(double hi, Pred pred) {
  std::uint64_t lo_bits = 0, hi_bits = std::bit_cast<std::uint64_t>(hi);
  while (hi_bits - lo_bits > 1) {
    const std::uint64_t mid = lo_bits + (hi_bits - lo_bits) / 2;
    if (pred(std::bit_cast<double>(mid)))
      hi_bits = mid;
    else
      lo_bits = mid;
  }
  return std::bit_cast<double>(hi_bits);
}

// Stemless subtree at v (stem == 0) or v's subtree under a stem of the given length.
inline MetricTree planted_at(const MetricTree& t, Vertex v, double stem) {
  std::vector<Vertex> parents{no_vertex};
  std::vector<double> lengths{0.0};
  std::vector<Vertex> queue{v}, image{0};
  if (stem > 0.0) {
    parents.push_back(0);
    lengths.push_back(stem);
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

// Tree spanned by the root, fully kept vertices and partially kept edges.
inline PrunedResult assemble(const MetricTree& t, const std::vector<char>& full, std::vector<double> retained,
                             std::vector<CutRecord> cuts) {
  const std::size_t n = t.vertex_count();
  std::vector<Vertex> image(n, no_vertex), parents{no_vertex};
  std::vector<double> lengths{0.0};
  image[0] = 0;
  for (Vertex v = 1; v < n; ++v) {
    if (retained[v] <= 0.0) continue;
    image[v] = Vertex(parents.size());
    parents.push_back(image[t.parent(v)]);
    lengths.push_back(retained[v]);
    if (!full[v]) image[v] = no_vertex;  // partial edge: its lower part is gone
  }
  PrunedResult r;
  r.tree = series_reduce(MetricTree::from_parents(parents, lengths));
  r.survived = !r.tree.empty();
  r.retained = std::move(retained);
  r.cuts = std::move(cuts);
  return r;
}

}  // namespace detail

// Smallest d with fl(value + d) >= threshold, for value < threshold <= fl(value + len).
inline double cut_offset(double value, double threshold, double len) {
  return detail::least_true(len, [&](double d) { return value + d >= threshold; });
}

// S_t(phi, T): keeps the root and every point x with phi(Delta_x) >= threshold.
inline PrunedResult gdp_prune(const MetricTree& t, const PhiFunctional& phi, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
  const std::size_t n = t.vertex_count();
  const auto val = phi.vertex_values(t);
  std::vector<char> full(n, 0);
  std::vector<double> retained(n, 0.0);
  std::vector<CutRecord> cuts;
  full[0] = 1;
  for (Vertex v = 1; v < n; ++v) {
    if (!full[t.parent(v)]) continue;
    const double len = t.length(v);
    if (val[v] >= threshold) {
      full[v] = 1;
      retained[v] = len;
      continue;
    }
    if (phi.law() == EdgeLaw::constant || !(val[v] + len >= threshold)) continue;
    const double kept = len - cut_offset(val[v], threshold, len);
    if (kept > 0.0) {
      retained[v] = kept;
      cuts.push_back({v, kept});
    }
  }
  return detail::assemble(t, full, std::move(retained), std::move(cuts));
}

// R_A(T): keeps the root and every point x with keep(Delta_x). Reference
// implementation, quadratic in the tree size.
inline PrunedResult hereditary_reduce(const MetricTree& t, const std::function<bool(const MetricTree&)>& keep,
                                      bool check = true) {
  const std::size_t n = t.vertex_count();
  std::vector<char> full(n, 0);
  std::vector<double> retained(n, 0.0);
  std::vector<CutRecord> cuts;
  full[0] = 1;
  for (Vertex v = 1; v < n; ++v) {
    if (!full[t.parent(v)]) continue;
    const double len = t.length(v);
    if (keep(detail::planted_at(t, v, 0.0))) {
      full[v] = 1;
      retained[v] = len;
      continue;
    }
    if (!keep(detail::planted_at(t, v, len))) continue;
    const double d = detail::least_true(len, [&](double s) { return keep(detail::planted_at(t, v, s)); });
    const double kept = len - d;
    if (kept > 0.0) {
      retained[v] = kept;
      cuts.push_back({v, kept});
    }
  }
  if (check) {
    for (Vertex v = 1; v < n; ++v)
      if (!full[v] && keep(detail::planted_at(t, v, 0.0))) throw NonHereditaryError(v, t.length(v));
  }
  return detail::assemble(t, full, std::move(retained), std::move(cuts));
}

// Randomized spot check of keep(Delta_x) => keep(Delta_y) for y an ancestor point of x.
inline std::optional<TreePoint> find_hereditary_violation(const MetricTree& t,
                                                          const std::function<bool(const MetricTree&)>& keep,
                                                          Stream& rng, int samples) {
  if (t.empty()) return std::nullopt;
  for (int s = 0; s < samples; ++s) {
    const Vertex v = 1 + Vertex(rng.uniform() * double(t.vertex_count() - 1));
    const double stem = rng.uniform() * t.length(v);
    if (!keep(detail::planted_at(t, v, stem))) continue;
    const double higher = stem + rng.uniform() * (t.length(v) - stem);
    if (higher > 0.0 && !keep(detail::planted_at(t, v, higher))) return TreePoint::on_edge(v, t.length(v) - higher);
    const Vertex p = t.parent(v);
    if (p != 0 && !keep(detail::planted_at(t, p, 0.0))) return TreePoint::at_vertex(t, p);
  }
  return std::nullopt;
}

// Removes all leaves, then series-reduces.
inline MetricTree horton_prune(const MetricTree& t) {
  const std::size_t n = t.vertex_count();
  std::vector<char> full(n, 0);
  std::vector<double> retained(n, 0.0);
  full[0] = 1;
  for (Vertex v = 1; v < n; ++v)
    if (t.child_count(v) > 0) {
      full[v] = 1;
      retained[v] = t.length(v);
    }
  return detail::assemble(t, full, std::move(retained), {}).tree;
}

inline CombinatorialTree horton_prune(const CombinatorialTree& t) {
  std::vector<Vertex> parents{no_vertex}, image(t.vertex_count(), no_vertex);
  image[0] = 0;
  for (Vertex v = 1; v < t.vertex_count(); ++v)
    if (t.child_count(v) > 0) {
      image[v] = Vertex(parents.size());
      parents.push_back(image[t.parent(v)]);
    }
  return series_reduce(CombinatorialTree::from_parents(parents));
}

// C_p(T): minimal subtree spanning the root and leaves selected with probability 1 - p.
inline PrunedResult bernoulli_color(const MetricTree& t, double p, Stream& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("coloring probability must lie in [0, 1)");
  const std::size_t n = t.vertex_count();
  std::vector<char> full(n, 0);
  for (Vertex v = 1; v < n; ++v)
    if (t.is_leaf(v)) full[v] = rng.uniform() < 1.0 - p;
  for (Vertex v = Vertex(n); v-- > 1;)
    if (full[v]) full[t.parent(v)] = 1;
  full[0] = 1;
  std::vector<double> retained(n, 0.0);
  for (Vertex v = 1; v < n; ++v)
    if (full[v]) retained[v] = t.length(v);
  return detail::assemble(t, full, std::move(retained), {});
}

struct SemigroupResult {
  bool equal = false;
  MetricTree composed;  // S_t2(S_s(T))
  MetricTree direct;    // S_{s+t2}(T)
};

inline SemigroupResult semigroup_check(const MetricTree& t, const PhiFunctional& phi, double s, double t2,
                                       double tol = 1e-9) {
  SemigroupResult r;
  r.composed = gdp_prune(gdp_prune(t, phi, s).tree, phi, t2).tree;
  r.direct = gdp_prune(t, phi, s + t2).tree;
  r.equal = approx_isomorphic(r.composed, r.direct, tol);
  return r;
}

}  // namespace igw
