#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "igw/offspring.hpp"
#include "igw/rng.hpp"
#include "igw/tree.hpp"

namespace igw {

struct SampleConfig {
  std::uint64_t seed = 0;
  std::uint32_t replicate = 0;
  std::uint64_t budget = 1'000'000;  // maximum number of edges
  std::optional<double> lambda;      // edge rate; empty for shape-only
};

template <class Tree>
struct SampleOutcome {
  std::optional<Tree> tree;  // empty when censored
  bool censored = false;
  std::uint64_t nodes = 0;  // edges generated
  std::uint64_t draws = 0;  // 64-bit RNG outputs consumed
};

inline long sample_offspring(const OffspringDistribution& d, Stream& rng,
                             long cap = std::numeric_limits<long>::max()) {
  return d.sample(rng.uniform(), cap);
}

namespace detail {

// Breadth-first Galton-Watson generation; parent array is already in BFS order.
inline bool grow(const OffspringDistribution& d, const SampleConfig& cfg, Stream& rng,
                 std::vector<Vertex>& parent) {
  if (cfg.budget < 1) throw std::invalid_argument("node budget must be >= 1");
  parent.assign({no_vertex, 0});
  for (std::size_t v = 1; v < parent.size(); ++v) {
    const long room = long(cfg.budget) - long(parent.size() - 1);
    const long k = d.sample(rng.uniform(), room);
    if (k > room) return false;
    parent.insert(parent.end(), std::size_t(k), Vertex(v));
  }
  return true;
}

}  // namespace detail

inline SampleOutcome<CombinatorialTree> sample_shape(const OffspringDistribution& d, const SampleConfig& cfg) {
  if (d.classify() == Criticality::supercritical) throw std::domain_error("sample_shape needs a (sub)critical law");
  Stream rng(cfg.seed, cfg.replicate, substream::shape);
  std::vector<Vertex> parent;
  SampleOutcome<CombinatorialTree> out;
  const bool done = detail::grow(d, cfg, rng, parent);
  out.nodes = parent.size() - 1;
  out.draws = rng.draws();
  if (!done) {
    out.censored = true;
    return out;
  }
  out.tree = CombinatorialTree::from_parents(parent);
  return out;
}

inline SampleOutcome<MetricTree> sample_metric(const OffspringDistribution& d, const SampleConfig& cfg) {
  if (!cfg.lambda || !(*cfg.lambda > 0.0)) throw std::invalid_argument("sample_metric needs lambda > 0");
  if (d.classify() == Criticality::supercritical) throw std::domain_error("sample_metric needs a (sub)critical law");
  Stream rng(cfg.seed, cfg.replicate, substream::shape);
  std::vector<Vertex> parent;
  SampleOutcome<MetricTree> out;
  const bool done = detail::grow(d, cfg, rng, parent);
  out.nodes = parent.size() - 1;
  out.draws = rng.draws();
  if (!done) {
    out.censored = true;
    return out;
  }
  Stream len_rng(cfg.seed, cfg.replicate, substream::lengths);
  std::vector<double> length(parent.size(), 0.0);
  for (std::size_t v = 1; v < parent.size(); ++v) length[v] = len_rng.exponential(*cfg.lambda);
  out.draws += len_rng.draws();
  out.tree = MetricTree::from_parents(parent, length);
  return out;
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Evaluates f(replicate) for replicates [first, first + n) on worker threads and
// returns the results in replicate order, so merging is deterministic.
template <class F>
auto map_replicates(std::uint32_t first, std::size_t n, F f, unsigned threads = 0)
    -> std::vector<decltype(f(std::uint32_t{}))> {
  using R = decltype(f(std::uint32_t{}));
  std::vector<R> out(n);
  if (threads == 0) threads = default_threads();
  threads = unsigned(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(std::uint32_t(first + i));
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) out[i] = f(std::uint32_t(first + i));
    });
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace igw
