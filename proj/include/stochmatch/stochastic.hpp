#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "solver.hpp"

namespace stochmatch {

/// The hidden set of realized edges for one trial.
struct Realization {
  EdgeSet realized;
  std::uint64_t seed = 0;
};

/// Edge e is realized iff a counter-based uniform keyed on (seed, e) falls
/// below p_e, so the outcome of an edge never depends on iteration order.
inline Realization realize(const WeightedGraph& g, std::uint64_t seed) {
  Realization r{g.no_edges(), seed};
  for (const Edge& e : g.edges())
    if (unit_double(hash2(seed, static_cast<std::uint64_t>(e.id))) < e.p) r.realized.insert(e.id);
  return r;
}

/// Which edges have been queried, what the queries returned, and how many
/// queried edges touch each vertex.
class QueryLedger {
 public:
  explicit QueryLedger(const WeightedGraph& g)
      : g_(&g), queried_(g.no_edges()), per_vertex_(static_cast<std::size_t>(g.n()), 0) {}

  /// Queries `edges` against `realization`. Re-querying is a no-op.
  void query(const Realization& realization, const EdgeSet& edges) {
    for (EdgeId e : edges.ids()) {
      if (queried_.contains(e)) continue;
      queried_.insert(e);
      outcomes_[e] = realization.realized.contains(e);
      ++per_vertex_[static_cast<std::size_t>(g_->edge(e).u)];
      ++per_vertex_[static_cast<std::size_t>(g_->edge(e).v)];
    }
  }

  const EdgeSet& queried() const { return queried_; }
  /// Outcome of a queried edge; throws for unqueried ones.
  bool outcome(EdgeId e) const {
    auto it = outcomes_.find(e);
    if (it == outcomes_.end()) throw Error(ErrorCode::BadFormat, "edge " + std::to_string(e) + " was never queried");
    return it->second;
  }
  const std::map<EdgeId, bool>& outcomes() const { return outcomes_; }
  const std::vector<std::int32_t>& per_vertex_counts() const { return per_vertex_; }
  std::int32_t max_per_vertex() const {
    std::int32_t best = 0;
    for (auto c : per_vertex_) best = std::max(best, c);
    return best;
  }
  std::size_t query_count() const { return outcomes_.size(); }

  /// Queried edges known to be realized.
  EdgeSet known_realized() const {
    EdgeSet s = g_->no_edges();
    for (auto [e, ok] : outcomes_)
      if (ok) s.insert(e);
    return s;
  }

 private:
  const WeightedGraph* g_;
  EdgeSet queried_;
  std::map<EdgeId, bool> outcomes_;
  std::vector<std::int32_t> per_vertex_;
};

inline QueryLedger query(QueryLedger ledger, const Realization& realization, const EdgeSet& edges) {
  ledger.query(realization, edges);
  return ledger;
}

/// Sample mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline constexpr std::size_t kExactEnumerationLimit = 20;

/// E[w(M(S ∩ 𝔈))] by enumerating every realization of the edges in `subset`.
/// Realization index bit j corresponds to the j-th smallest id in `subset`;
/// terms are summed in increasing index order.
inline double expected_matching_exact(const WeightedGraph& g, const EdgeSet& subset) {
  const auto ids = subset.ids();
  if (ids.size() > kExactEnumerationLimit)
    throw Error(ErrorCode::TooLarge, std::to_string(ids.size()) + " edges exceeds exact enumeration limit " +
                                         std::to_string(kExactEnumerationLimit));
  const std::size_t total = std::size_t{1} << ids.size();
  std::vector<Weight> weight(total, 0);
  parallel_for(total, [&](std::size_t mask) {
    EdgeSet s = g.no_edges();
    for (std::size_t j = 0; j < ids.size(); ++j)
      if (mask >> j & 1U) s.insert(ids[j]);
    weight[mask] = max_weight_matching(g, s).weight;
  });
  double sum = 0.0;
  for (std::size_t mask = 0; mask < total; ++mask) {
    double pr = 1.0;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const double p = g.edge(ids[j]).p;
      pr *= (mask >> j & 1U) ? p : 1.0 - p;
    }
    sum += pr * static_cast<double>(weight[mask]);
  }
  return sum;
}

/// opt = E[w(M(𝔈))], exactly, for m <= 20.
inline double omniscient_opt_exact(const WeightedGraph& g) { return expected_matching_exact(g, g.all_edges()); }

/// Mean and standard error of a per-trial integer statistic.
inline Estimate summarize(const std::vector<Weight>& samples) {
  const auto n = static_cast<double>(samples.size());
  if (samples.empty()) return {};
  long double sum = 0;
  for (Weight w : samples) sum += static_cast<long double>(w);
  const double mean = static_cast<double>(sum / static_cast<long double>(samples.size()));
  if (samples.size() < 2) return {mean, 0.0};
  long double ss = 0;
  for (Weight w : samples) {
    long double d = static_cast<long double>(w) - static_cast<long double>(mean);
    ss += d * d;
  }
  const double var = static_cast<double>(ss / static_cast<long double>(n - 1));
  return {mean, std::sqrt(var / n)};
}

/// Monte Carlo estimate of E[w(M(S ∩ 𝔈))]; trial i uses realize(g, derive_seed(seed, tag, i)).
inline Estimate expected_matching_mc(const WeightedGraph& g, const EdgeSet& subset, std::size_t trials,
                                     std::uint64_t seed, std::string_view tag) {
  if (trials < 2) throw Error(ErrorCode::BadConfig, "Monte Carlo estimation needs at least 2 trials");
  std::vector<Weight> samples(trials);
  parallel_for(trials, [&](std::size_t i) {
    Realization r = realize(g, derive_seed(seed, tag, i));
    samples[i] = max_weight_matching(g, r.realized & subset).weight;
  });
  return summarize(samples);
}

inline Estimate omniscient_opt_mc(const WeightedGraph& g, std::size_t trials, std::uint64_t seed) {
  return expected_matching_mc(g, g.all_edges(), trials, seed, "opt");
}

}  // namespace stochmatch
