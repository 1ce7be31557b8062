#pragma once

// Hand-rolled random instance generators shared by the test binaries.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "stochmatch/stochmatch.hpp"

namespace testing_support {

using namespace stochmatch;

/// Random simple graph: each pair present with probability `density`.
inline WeightedGraph random_graph(SplitMix& rng, std::int32_t n, double density, Weight wmin, Weight wmax,
                                  double p = 0.5) {
  std::vector<EdgeSpec> edges;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v)
      if (rng.unit() < density) edges.push_back({u, v, rng.uniform(wmin, wmax), p});
  return build_graph(n, edges);
}

/// Random graph with per-edge probabilities drawn from [plo, phi].
inline WeightedGraph random_graph_mixed_p(SplitMix& rng, std::int32_t n, double density, Weight wmax, double plo,
                                          double phi) {
  std::vector<EdgeSpec> edges;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v)
      if (rng.unit() < density) {
        const double p = plo + (phi - plo) * rng.unit();
        edges.push_back({u, v, rng.uniform(1, wmax), std::max(p, 1e-6)});
      }
  return build_graph(n, edges);
}

/// Greedy maximal matching over a random edge order, each edge kept with probability `keep`.
inline Matching random_matching(SplitMix& rng, const WeightedGraph& g, double keep = 1.0) {
  std::vector<EdgeId> order(static_cast<std::size_t>(g.m()));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(i) - 1))]);
  std::vector<char> used(static_cast<std::size_t>(g.n()), 0);
  std::vector<EdgeId> chosen;
  for (EdgeId e : order) {
    const Edge& ed = g.edge(e);
    if (used[static_cast<std::size_t>(ed.u)] || used[static_cast<std::size_t>(ed.v)]) continue;
    if (rng.unit() >= keep) continue;
    used[static_cast<std::size_t>(ed.u)] = used[static_cast<std::size_t>(ed.v)] = 1;
    chosen.push_back(e);
  }
  return validate_matching(g, chosen);
}

/// A graph that is a single path or even cycle, with the matchings that make
/// it one alternating component. Edge i joins vertices i and i+1 (mod len for
/// cycles); edges with is_aug[i] go to m_h, the rest to m_l.
struct ComponentInstance {
  WeightedGraph g;
  Matching m_l;
  Matching m_h;
};

inline ComponentInstance component_instance(Shape shape, const std::vector<Weight>& w, bool first_aug) {
  const auto len = static_cast<std::int32_t>(w.size());
  const std::int32_t n = shape == Shape::Cycle ? len : len + 1;
  std::vector<EdgeSpec> edges;
  std::vector<EdgeId> lo, hi;
  for (std::int32_t i = 0; i < len; ++i) {
    edges.push_back({i, (i + 1) % (shape == Shape::Cycle ? len : len + 1), w[static_cast<std::size_t>(i)], 0.5});
    const bool aug = (i % 2 == 0) == first_aug;
    (aug ? hi : lo).push_back(i);
  }
  ComponentInstance ci{build_graph(n, edges), {}, {}};
  ci.m_l = validate_matching(ci.g, lo);
  ci.m_h = validate_matching(ci.g, hi);
  return ci;
}

/// Random path or cycle component with 1..max_len edges and weights in [0, wmax].
inline ComponentInstance random_component_instance(SplitMix& rng, std::int64_t max_len, Weight wmax,
                                                   bool allow_cycle = true) {
  const bool cycle = allow_cycle && rng.unit() < 0.4;
  std::int64_t len;
  if (cycle) {
    len = 2 * rng.uniform(2, std::max<std::int64_t>(2, max_len / 2));
  } else {
    len = rng.uniform(1, max_len);
  }
  std::vector<Weight> w(static_cast<std::size_t>(len));
  for (auto& x : w) x = rng.uniform(0, wmax);
  return component_instance(cycle ? Shape::Cycle : Shape::Path, w, cycle || rng.unit() < 0.5);
}

/// The single component of a ComponentInstance.
inline AlternatingComponent only_component(const ComponentInstance& ci) {
  auto comps = decompose(ci.m_l, ci.m_h, ci.g);
  return comps.at(0);
}

}  // namespace testing_support
