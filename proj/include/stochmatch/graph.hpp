#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace stochmatch {

using Vertex = std::int32_t;
using EdgeId = std::int32_t;
using Weight = std::int64_t;

struct Edge {
  EdgeId id = 0;
  Vertex u = 0;
  Vertex v = 0;
  Weight w = 0;
  double p = 1.0;

  Vertex other(Vertex x) const { return x == u ? v : u; }
};

/// Input record for build_graph: endpoints, integer weight, realization probability.
struct EdgeSpec {
  Vertex u = 0;
  Vertex v = 0;
  Weight w = 0;
  double p = 1.0;
};

/// Bitset over edge ids 0..m-1.
class EdgeSet {
 public:
  EdgeSet() = default;
  explicit EdgeSet(std::size_t m, bool full = false) : size_(m), words_((m + 63) / 64, 0) {
    if (full) fill();
  }

  static EdgeSet of(std::size_t m, std::span<const EdgeId> ids) {
    EdgeSet s(m);
    for (EdgeId e : ids) s.insert(e);
    return s;
  }

  std::size_t universe() const { return size_; }

  bool contains(EdgeId e) const {
    check(e);
    return (words_[static_cast<std::size_t>(e) >> 6] >> (e & 63)) & 1U;
  }
  void insert(EdgeId e) {
    check(e);
    words_[static_cast<std::size_t>(e) >> 6] |= std::uint64_t{1} << (e & 63);
  }
  void erase(EdgeId e) {
    check(e);
    words_[static_cast<std::size_t>(e) >> 6] &= ~(std::uint64_t{1} << (e & 63));
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }
  bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }

  std::vector<EdgeId> ids() const {
    std::vector<EdgeId> out;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        int b = __builtin_ctzll(w);
        out.push_back(static_cast<EdgeId>(i * 64 + static_cast<std::size_t>(b)));
        w &= w - 1;
      }
    }
    return out;
  }

  EdgeSet& operator|=(const EdgeSet& o) {
    same(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  EdgeSet& operator&=(const EdgeSet& o) {
    same(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  /// Set difference.
  EdgeSet& operator-=(const EdgeSet& o) {
    same(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }
  friend EdgeSet operator|(EdgeSet a, const EdgeSet& b) { return a |= b; }
  friend EdgeSet operator&(EdgeSet a, const EdgeSet& b) { return a &= b; }
  friend EdgeSet operator-(EdgeSet a, const EdgeSet& b) { return a -= b; }
  EdgeSet complement() const { return EdgeSet(size_, true) - *this; }

  bool subset_of(const EdgeSet& o) const {
    same(o);
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  friend bool operator==(const EdgeSet&, const EdgeSet&) = default;

 private:
  void fill() {
    std::fill(words_.begin(), words_.end(), ~std::uint64_t{0});
    if (size_ % 64 != 0 && !words_.empty()) words_.back() = (std::uint64_t{1} << (size_ % 64)) - 1;
  }
  void check(EdgeId e) const {
    if (e < 0 || static_cast<std::size_t>(e) >= size_)
      throw Error(ErrorCode::BadFormat, "edge id " + std::to_string(e) + " outside 0.." + std::to_string(size_));
  }
  void same(const EdgeSet& o) const {
    if (o.size_ != size_) throw Error(ErrorCode::BadFormat, "edge sets over different universes");
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Simple undirected graph with integer weights and per-edge realization
/// probabilities. Immutable after construction.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  std::int32_t n() const { return n_; }
  std::int32_t m() const { return static_cast<std::int32_t>(edges_.size()); }
  const Edge& edge(EdgeId e) const { return edges_.at(static_cast<std::size_t>(e)); }
  std::span<const Edge> edges() const { return edges_; }
  /// Edge ids incident to v, in increasing id order.
  std::span<const EdgeId> incident(Vertex v) const { return adj_.at(static_cast<std::size_t>(v)); }
  Weight total_weight() const { return total_; }
  double min_probability() const {
    double p = 1.0;
    for (const auto& e : edges_) p = std::min(p, e.p);
    return p;
  }
  EdgeSet all_edges() const { return EdgeSet(edges_.size(), true); }
  EdgeSet no_edges() const { return EdgeSet(edges_.size()); }

  Weight weight_of(std::span<const EdgeId> ids) const {
    Weight s = 0;
    for (EdgeId e : ids) s += edge(e).w;
    return s;
  }
  Weight weight_of(const EdgeSet& s) const { return weight_of(s.ids()); }

  friend WeightedGraph build_graph(std::int32_t n, std::span<const EdgeSpec> edge_list);

 private:
  std::int32_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> adj_;
  Weight total_ = 0;
};

inline WeightedGraph build_graph(std::int32_t n, std::span<const EdgeSpec> edge_list) {
  if (n < 0) throw Error(ErrorCode::BadVertex, "negative vertex count");
  WeightedGraph g;
  g.n_ = n;
  g.adj_.assign(static_cast<std::size_t>(n), {});
  std::map<std::pair<Vertex, Vertex>, EdgeId> seen;
  for (const auto& s : edge_list) {
    const auto id = static_cast<EdgeId>(g.edges_.size());
    const std::string where = "edge " + std::to_string(id) + " (" + std::to_string(s.u) + "," + std::to_string(s.v) + ")";
    if (s.u < 0 || s.v < 0 || s.u >= n || s.v >= n) throw Error(ErrorCode::BadVertex, where + " endpoint out of range");
    if (s.u == s.v) throw Error(ErrorCode::SelfLoop, where);
    // NaN fails both comparisons.
    if (!(s.p > 0.0 && s.p <= 1.0)) throw Error(ErrorCode::BadProbability, where + " p=" + std::to_string(s.p));
    if (s.w < 0) throw Error(ErrorCode::Overflow, where + " negative weight");
    if (s.w > std::numeric_limits<Weight>::max() - g.total_) throw Error(ErrorCode::Overflow, where + " total weight exceeds 63 bits");
    auto key = std::minmax(s.u, s.v);
    if (!seen.emplace(key, id).second) throw Error(ErrorCode::DuplicateEdge, where);
    g.edges_.push_back(Edge{id, s.u, s.v, s.w, s.p});
    g.adj_[static_cast<std::size_t>(s.u)].push_back(id);
    g.adj_[static_cast<std::size_t>(s.v)].push_back(id);
    g.total_ += s.w;
  }
  return g;
}

inline WeightedGraph build_graph(std::int32_t n, std::initializer_list<EdgeSpec> edge_list) {
  return build_graph(n, std::span<const EdgeSpec>(edge_list.begin(), edge_list.size()));
}

/// Vertex-disjoint edge subset with its exact total weight.
struct Matching {
  std::vector<EdgeId> edge_ids;  // sorted
  Weight weight = 0;

  bool empty() const { return edge_ids.empty(); }
  std::size_t size() const { return edge_ids.size(); }
  EdgeSet as_set(std::size_t m) const { return EdgeSet::of(m, edge_ids); }

  friend bool operator==(const Matching&, const Matching&) = default;
};

inline Matching validate_matching(const WeightedGraph& g, std::span<const EdgeId> ids) {
  std::vector<EdgeId> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<char> used(static_cast<std::size_t>(g.n()), 0);
  Matching out;
  for (EdgeId e : sorted) {
    if (e < 0 || e >= g.m()) throw Error(ErrorCode::BadFormat, "edge id " + std::to_string(e) + " not in graph");
    const Edge& ed = g.edge(e);
    for (Vertex x : {ed.u, ed.v}) {
      if (used[static_cast<std::size_t>(x)])
        throw Error(ErrorCode::NotAMatching, "vertex " + std::to_string(x) + " covered twice");
      used[static_cast<std::size_t>(x)] = 1;
    }
    out.weight += ed.w;
  }
  out.edge_ids = std::move(sorted);
  return out;
}

inline Matching validate_matching(const WeightedGraph& g, const EdgeSet& ids) {
  return validate_matching(g, ids.ids());
}

enum class Shape { Path, Cycle };

inline const char* to_string(Shape s) { return s == Shape::Path ? "path" : "cycle"; }

/// One connected component of a symmetric difference of two matchings.
struct RawComponent {
  Shape shape = Shape::Path;
  std::vector<EdgeId> edges;  // traversal order
};

/// Connected components of (a ∪ b) − (a ∩ b), ordered by smallest edge id.
///
/// Paths are walked from the end whose terminal edge has the smaller id.
/// Cycles start at their smallest-id edge from `b` and continue towards the
/// smaller-id neighbouring edge.
inline std::vector<RawComponent> symmetric_difference(const Matching& a, const Matching& b,
                                                      const WeightedGraph& g) {
  const auto n = static_cast<std::size_t>(g.n());
  const std::size_t m = static_cast<std::size_t>(g.m());
  EdgeSet sa = a.as_set(m), sb = b.as_set(m);
  EdgeSet diff = (sa | sb) - (sa & sb);
  // Each vertex has at most one edge from each side.
  std::vector<EdgeId> from_a(n, -1), from_b(n, -1);
  for (EdgeId e : diff.ids()) {
    auto& slot = sa.contains(e) ? from_a : from_b;
    slot[static_cast<std::size_t>(g.edge(e).u)] = e;
    slot[static_cast<std::size_t>(g.edge(e).v)] = e;
  }
  auto partner = [&](Vertex x, EdgeId e) -> EdgeId {
    EdgeId ea = from_a[static_cast<std::size_t>(x)], eb = from_b[static_cast<std::size_t>(x)];
    return ea == e ? eb : ea;
  };

  std::vector<char> visited(m, 0);
  std::vector<RawComponent> out;
  for (EdgeId seed : diff.ids()) {
    if (visited[static_cast<std::size_t>(seed)]) continue;
    // Collect the component and find whether it has a free end.
    std::vector<EdgeId> members;
    std::vector<EdgeId> stack{seed};
    visited[static_cast<std::size_t>(seed)] = 1;
    while (!stack.empty()) {
      EdgeId e = stack.back();
      stack.pop_back();
      members.push_back(e);
      for (Vertex x : {g.edge(e).u, g.edge(e).v}) {
        EdgeId f = partner(x, e);
        if (f >= 0 && !visited[static_cast<std::size_t>(f)]) {
          visited[static_cast<std::size_t>(f)] = 1;
          stack.push_back(f);
        }
      }
    }
    // Terminal edges: edges with an endpoint that has no partner.
    std::vector<std::pair<EdgeId, Vertex>> ends;
    for (EdgeId e : members)
      for (Vertex x : {g.edge(e).u, g.edge(e).v})
        if (partner(x, e) < 0) ends.emplace_back(e, x);

    RawComponent comp;
    EdgeId start;
    Vertex at;
    if (!ends.empty()) {
      comp.shape = Shape::Path;
      auto best = std::min_element(ends.begin(), ends.end());
      start = best->first;
      at = best->second;  // the free end; walk away from it
    } else {
      comp.shape = Shape::Cycle;
      start = -1;
      for (EdgeId e : members)
        if (sb.contains(e) && (start < 0 || e < start)) start = e;
      const Edge& se = g.edge(start);
      EdgeId nu = partner(se.u, start), nv = partner(se.v, start);
      // Leave through the endpoint whose next edge has the smaller id.
      at = nu < nv ? se.v : se.u;
    }
    EdgeId cur = start;
    Vertex from = at;
    while (true) {
      comp.edges.push_back(cur);
      Vertex next_v = g.edge(cur).other(from);
      EdgeId nxt = partner(next_v, cur);
      if (nxt < 0 || nxt == start) break;
      from = next_v;
      cur = nxt;
    }
    out.push_back(std::move(comp));
  }
  // Seeds were visited in increasing id order, so components are already
  // sorted by their smallest edge id.
  return out;
}

}  // namespace stochmatch
