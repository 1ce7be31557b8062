#pragma once

// Weighted alternating components of M_L Δ M_H and the deletion/splitting
// machinery used to bound their length.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "rational.hpp"

namespace stochmatch {

using Wide = __int128;

/// Exact fraction with an unreduced numerator and positive denominator.
struct Fraction {
  Weight num = 0;
  Weight den = 1;
};

/// One connected component C of M_L Δ M_H.
///
/// `edges`, `weights` and `is_aug` run in parallel along the traversal.
/// B_C (`base`) holds the M_L edges and Q_C (`aug`) the M_H edges, each in
/// traversal order.
struct AlternatingComponent {
  Shape shape = Shape::Path;
  std::vector<EdgeId> edges;
  std::vector<Weight> weights;
  std::vector<char> is_aug;
  std::vector<EdgeId> base;
  std::vector<EdgeId> aug;
  Weight base_weight = 0;
  Weight aug_weight = 0;
  Weight delta = 0;  // w(Q_C) - w(B_C)

  std::size_t size() const { return edges.size(); }
  bool augmenting() const { return delta > 0; }
  /// L_C = w(Q_C) / Δ_C; only defined for augmenting components.
  std::optional<Fraction> norm_length() const {
    if (!augmenting()) return std::nullopt;
    return Fraction{aug_weight, delta};
  }
};

namespace detail {

inline AlternatingComponent make_component(Shape shape, std::vector<EdgeId> edges, std::vector<Weight> weights,
                                           std::vector<char> is_aug) {
  AlternatingComponent c;
  c.shape = shape;
  c.edges = std::move(edges);
  c.weights = std::move(weights);
  c.is_aug = std::move(is_aug);
  for (std::size_t i = 0; i < c.edges.size(); ++i) {
    if (c.is_aug[i]) {
      c.aug.push_back(c.edges[i]);
      c.aug_weight += c.weights[i];
    } else {
      c.base.push_back(c.edges[i]);
      c.base_weight += c.weights[i];
    }
  }
  c.delta = c.aug_weight - c.base_weight;
  return c;
}

}  // namespace detail

/// One AlternatingComponent per component of m_l Δ m_h, in the order of
/// symmetric_difference (smallest edge id first).
inline std::vector<AlternatingComponent> decompose(const Matching& m_l, const Matching& m_h, const WeightedGraph& g) {
  const EdgeSet heavy = m_h.as_set(static_cast<std::size_t>(g.m()));
  std::vector<AlternatingComponent> out;
  for (auto& raw : symmetric_difference(m_l, m_h, g)) {
    std::vector<Weight> w;
    std::vector<char> aug;
    for (EdgeId e : raw.edges) {
      w.push_back(g.edge(e).w);
      aug.push_back(heavy.contains(e) ? 1 : 0);
    }
    out.push_back(detail::make_component(raw.shape, std::move(raw.edges), std::move(w), std::move(aug)));
  }
  return out;
}

/// M_L \ B_C ∪ Q_C. Throws NotAugmentable when B_C ⊄ m_l or the result is not a matching.
inline Matching augment(const Matching& m_l, const AlternatingComponent& c, const WeightedGraph& g) {
  const auto m = static_cast<std::size_t>(g.m());
  EdgeSet cur = m_l.as_set(m);
  for (EdgeId e : c.base) {
    if (!cur.contains(e)) throw Error(ErrorCode::NotAugmentable, "base edge " + std::to_string(e) + " not in M_L");
    cur.erase(e);
  }
  for (EdgeId e : c.aug) cur.insert(e);
  try {
    return validate_matching(g, cur);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::NotAMatching) throw Error(ErrorCode::NotAugmentable, err.what());
    throw;
  }
}

/// Edge labelling of a component:
///   case 1: path starting with an augmenting edge  -> q1 b1 q2 b2 ...
///   case 2: path starting with a base edge         -> b0 q1 b1 q2 ...
///   case 3: cycle, rotated to its smallest-id augmenting edge -> q1 b1 ... qk bk
struct LabeledComponent {
  int label_case = 1;
  Shape shape = Shape::Path;
  std::vector<EdgeId> q;
  std::vector<Weight> q_weight;
  std::vector<EdgeId> b;  // b[0] is b0 in case 2, otherwise b1
  std::vector<Weight> b_weight;

  bool has_b0() const { return label_case == 2; }
  std::size_t k() const { return q.size(); }
  Weight q_total() const { return std::accumulate(q_weight.begin(), q_weight.end(), Weight{0}); }

  /// Edges in labelled order.
  std::vector<EdgeId> interleaved() const {
    std::vector<EdgeId> out;
    std::size_t bi = 0;
    if (has_b0()) out.push_back(b[bi++]);
    for (std::size_t i = 0; i < q.size(); ++i) {
      out.push_back(q[i]);
      if (bi < b.size()) out.push_back(b[bi++]);
    }
    return out;
  }
};

inline LabeledComponent label_edges(const AlternatingComponent& c) {
  if (c.edges.empty()) throw Error(ErrorCode::BadFormat, "cannot label an empty component");
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  LabeledComponent lc;
  lc.shape = c.shape;
  if (c.shape == Shape::Cycle) {
    lc.label_case = 3;
    std::size_t start = c.size();
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c.is_aug[i] && (start == c.size() || c.edges[i] < c.edges[start])) start = i;
    if (start == c.size()) throw Error(ErrorCode::BadFormat, "cycle without augmenting edge");
    std::rotate(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(start), order.end());
  } else {
    lc.label_case = c.is_aug[0] ? 1 : 2;
  }
  for (std::size_t i : order) {
    if (c.is_aug[i]) {
      lc.q.push_back(c.edges[i]);
      lc.q_weight.push_back(c.weights[i]);
    } else {
      lc.b.push_back(c.edges[i]);
      lc.b_weight.push_back(c.weights[i]);
    }
  }
  return lc;
}

/// D_i = {q_i, q_{i+α}, q_{i+2α}, ...} for i = 1..α, and the lightest one.
struct DeletionPartition {
  std::int64_t alpha = 1;
  std::vector<std::vector<EdgeId>> parts;  // parts[i-1] is D_i; min(α, k+1) stored
  std::vector<Weight> part_weight;
  std::size_t chosen_index = 1;  // 1-based, smallest index among the minima
  Weight q_total = 0;

  const std::vector<EdgeId>& chosen() const { return parts[chosen_index - 1]; }
  Weight chosen_weight() const { return part_weight[chosen_index - 1]; }
  /// w(D_chosen) * α <= w(Q_C), cross-multiplied.
  bool claim_holds() const { return Wide{chosen_weight()} * alpha <= Wide{q_total}; }
};

inline DeletionPartition deletion_partition(const LabeledComponent& lc, std::int64_t alpha) {
  if (alpha < 1) throw Error(ErrorCode::BadFormat, "alpha must be >= 1");
  DeletionPartition dp;
  dp.alpha = alpha;
  // D_i is empty for i > k, so at most k + 1 parts are stored; the rest are
  // implicitly empty and can never beat the first empty one in the argmin.
  const auto stored = static_cast<std::size_t>(std::min<std::int64_t>(alpha, static_cast<std::int64_t>(lc.q.size()) + 1));
  dp.parts.assign(stored, {});
  dp.part_weight.assign(stored, 0);
  for (std::size_t j = 0; j < lc.q.size(); ++j) {
    const auto part = static_cast<std::size_t>(static_cast<std::int64_t>(j) % alpha);
    dp.parts[part].push_back(lc.q[j]);
    dp.part_weight[part] += lc.q_weight[j];
  }
  dp.q_total = lc.q_total();
  dp.chosen_index =
      static_cast<std::size_t>(std::min_element(dp.part_weight.begin(), dp.part_weight.end()) - dp.part_weight.begin()) + 1;
  return dp;
}

/// α = ceil(2 L_C) = ceil(2 w(Q_C) / Δ_C).
inline std::int64_t compute_alpha(const AlternatingComponent& c) {
  if (!c.augmenting())
    throw Error(ErrorCode::NotAugmenting, "component value " + std::to_string(c.delta) + " is not positive");
  const Wide num = Wide{2} * c.aug_weight;
  return static_cast<std::int64_t>((num + c.delta - 1) / c.delta);
}

/// Sub-components left after deleting some augmenting edges of C.
struct SubComponentSplit {
  std::vector<AlternatingComponent> fragments;
  std::vector<EdgeId> removed;
  Weight removed_weight = 0;

  Weight delta_sum() const {
    Weight s = 0;
    for (const auto& f : fragments) s += f.delta;
    return s;
  }
  std::size_t max_fragment_aug_edges() const {
    std::size_t best = 0;
    for (const auto& f : fragments) best = std::max(best, f.aug.size());
    return best;
  }
};

/// Deletes `removed` (edge ids of C) and returns the maximal remaining runs.
inline SubComponentSplit remove_edges(const AlternatingComponent& c, const std::vector<EdgeId>& removed) {
  SubComponentSplit split;
  split.removed = removed;
  std::vector<char> cut(c.size(), 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::find(removed.begin(), removed.end(), c.edges[i]) != removed.end()) {
      cut[i] = 1;
      split.removed_weight += c.weights[i];
    }
  }
  const bool any_cut = std::find(cut.begin(), cut.end(), 1) != cut.end();
  if (!any_cut) {
    split.fragments.push_back(c);
    return split;
  }
  // For a cycle, start just after a cut so that no run wraps around.
  std::size_t start = 0;
  if (c.shape == Shape::Cycle) {
    std::size_t first_cut = static_cast<std::size_t>(std::find(cut.begin(), cut.end(), 1) - cut.begin());
    start = (first_cut + 1) % c.size();
  }
  std::vector<EdgeId> ids;
  std::vector<Weight> ws;
  std::vector<char> aug;
  auto flush = [&] {
    if (!ids.empty())
      split.fragments.push_back(detail::make_component(Shape::Path, std::move(ids), std::move(ws), std::move(aug)));
    ids.clear();
    ws.clear();
    aug.clear();
  };
  for (std::size_t step = 0; step < c.size(); ++step) {
    const std::size_t i = (start + step) % c.size();
    if (cut[i]) {
      flush();
      continue;
    }
    ids.push_back(c.edges[i]);
    ws.push_back(c.weights[i]);
    aug.push_back(c.is_aug[i]);
  }
  flush();
  return split;
}

/// Deletes D_chosen from C.
inline SubComponentSplit split_component(const AlternatingComponent& c, const DeletionPartition& dp) {
  return remove_edges(c, dp.chosen());
}

/// Σ_j Δ_{C_j} >= Δ_C / 2, cross-multiplied.
inline bool split_keeps_half(const AlternatingComponent& c, const SubComponentSplit& split) {
  return Wide{2} * split.delta_sum() >= Wide{c.delta};
}

// ---------------------------------------------------------------------------
// Bounded decomposition: shrink M_H so that every augmenting component of
// M_L Δ M'_H is short while losing little weight.

struct ComponentReduction {
  AlternatingComponent component;
  std::int64_t alpha = 0;  // residue modulus used, 0 when untouched
  std::vector<EdgeId> removed;
  Weight removed_weight = 0;
  /// "none", "residue" (lightest D_i) or "min_cut" (cheapest removal that
  /// bounds every augmenting fragment).
  std::string strategy = "none";
};

struct BoundedDecomposition {
  Matching reduced;  // M'_H
  std::vector<ComponentReduction> components;
  std::int64_t edge_limit = 0;  // ceil(4/eps)
  std::int64_t alpha = 0;       // ceil(2/eps)
  Weight removed_weight = 0;
  bool size_bound_ok = false;    // every augmenting component of M_L Δ M'_H has <= edge_limit edges
  bool weight_bound_ok = false;  // w(M'_H) >= (1 - eps/2) w(M_H)
  /// No subset of M_H meets both bounds; `reduced` then keeps the weight bound.
  bool infeasible = false;
};

namespace detail {

inline bool fragments_bounded(const SubComponentSplit& split, std::int64_t limit) {
  for (const auto& f : split.fragments)
    if (f.augmenting() && static_cast<std::int64_t>(f.size()) > limit) return false;
  return true;
}

/// Cheapest set of augmenting edges of `c` whose deletion leaves no
/// augmenting run longer than `limit`. Exact dynamic program over cut
/// positions; for cycles the first cut is enumerated.
inline std::vector<EdgeId> min_bounding_cut(const AlternatingComponent& c, std::int64_t limit) {
  constexpr Weight kInf = std::numeric_limits<Weight>::max() / 4;
  const std::size_t L = c.size();

  // Best cuts over the linear sequence seq[lo..hi) (indices into c, taken mod L).
  auto solve_line = [&](std::size_t lo, std::size_t hi, Weight& cost) {
    const std::size_t len = hi - lo;
    std::vector<Weight> signed_prefix(len + 1, 0);
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t i = (lo + t) % L;
      signed_prefix[t + 1] = signed_prefix[t] + (c.is_aug[i] ? c.weights[i] : -c.weights[i]);
    }
    // Run [a, b) of the line is acceptable if empty, short, or not augmenting.
    auto ok = [&](std::size_t a, std::size_t b) {
      return b <= a || static_cast<std::int64_t>(b - a) <= limit || signed_prefix[b] - signed_prefix[a] <= 0;
    };
    std::vector<std::size_t> cuts;
    for (std::size_t t = 0; t < len; ++t)
      if (c.is_aug[(lo + t) % L]) cuts.push_back(t);
    std::vector<Weight> best(cuts.size(), kInf);
    std::vector<std::ptrdiff_t> parent(cuts.size(), -1);
    for (std::size_t x = 0; x < cuts.size(); ++x) {
      const Weight w = c.weights[(lo + cuts[x]) % L];
      if (ok(0, cuts[x])) best[x] = w;
      for (std::size_t y = 0; y < x; ++y) {
        if (best[y] < kInf && ok(cuts[y] + 1, cuts[x]) && best[y] + w < best[x]) {
          best[x] = best[y] + w;
          parent[x] = static_cast<std::ptrdiff_t>(y);
        }
      }
    }
    cost = ok(0, len) ? 0 : kInf;
    std::ptrdiff_t last = -1;
    for (std::size_t x = 0; x < cuts.size(); ++x) {
      if (best[x] < cost && ok(cuts[x] + 1, len)) {
        cost = best[x];
        last = static_cast<std::ptrdiff_t>(x);
      }
    }
    std::vector<EdgeId> chosen;
    for (std::ptrdiff_t x = last; x >= 0; x = parent[static_cast<std::size_t>(x)])
      chosen.push_back(c.edges[(lo + cuts[static_cast<std::size_t>(x)]) % L]);
    return chosen;
  };

  if (c.shape == Shape::Path) {
    Weight cost = 0;
    return solve_line(0, L, cost);
  }
  if (!c.augmenting() || static_cast<std::int64_t>(L) <= limit) return {};
  Weight best_cost = kInf;
  std::vector<EdgeId> best;
  for (std::size_t f = 0; f < L; ++f) {
    if (!c.is_aug[f]) continue;
    Weight rest = 0;
    auto cut = solve_line(f + 1, f + L, rest);
    if (rest >= kInf) continue;
    if (rest + c.weights[f] < best_cost) {
      best_cost = rest + c.weights[f];
      cut.push_back(c.edges[f]);
      best = std::move(cut);
    }
  }
  return best;
}

}  // namespace detail

/// Reduces m_h to M'_H ⊆ m_h.
///
/// Every augmenting component longer than ceil(4/eps) edges loses its
/// lightest residue class D_i (α = ceil(2/eps)). On paths that always leaves
/// runs of at most 2α - 1 <= ceil(4/eps) edges. On a cycle whose length is
/// not a multiple of α the wrap-around run can stay too long; there the
/// cheapest bounding cut is used instead. If that overspends the eps/2
/// budget, every long component switches to its cheapest bounding cut, which
/// is the globally cheapest M'_H meeting the size bound. When even that is
/// over budget the instance admits no valid M'_H: `infeasible` is set and
/// the residue-class removal (which always meets the weight bound) is kept.
inline BoundedDecomposition decompose_bounded(const Matching& m_l, const Matching& m_h, const WeightedGraph& g,
                                              Rational eps) {
  checked_epsilon(eps);
  BoundedDecomposition out;
  out.edge_limit = ceil_div(4 * eps.den, eps.num);
  out.alpha = ceil_div(2 * eps.den, eps.num);

  auto comps = decompose(m_l, m_h, g);
  std::vector<ComponentReduction> residue, min_cut;
  for (auto& c : comps) {
    ComponentReduction r;
    r.component = c;
    ComponentReduction mc = r;
    if (c.augmenting() && static_cast<std::int64_t>(c.size()) > out.edge_limit) {
      auto dp = deletion_partition(label_edges(c), out.alpha);
      r.alpha = out.alpha;
      r.removed = dp.chosen();
      r.removed_weight = dp.chosen_weight();
      r.strategy = "residue";
      mc.removed = detail::min_bounding_cut(c, out.edge_limit);
      mc.removed_weight = remove_edges(c, mc.removed).removed_weight;
      mc.strategy = "min_cut";
    }
    residue.push_back(std::move(r));
    min_cut.push_back(std::move(mc));
  }

  auto budget_ok = [&](Weight removed) {
    // w(M_H) - removed >= (1 - eps/2) w(M_H)  <=>  2 den removed <= num w(M_H)
    return Wide{2} * eps.den * removed <= Wide{eps.num} * m_h.weight;
  };
  auto total = [](const std::vector<ComponentReduction>& rs) {
    Weight s = 0;
    for (const auto& r : rs) s += r.removed_weight;
    return s;
  };

  // First pass: residue classes, patched with the min cut where they leave a long run.
  std::vector<ComponentReduction> plan = residue;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan[i].strategy != "residue") continue;
    if (!detail::fragments_bounded(remove_edges(plan[i].component, plan[i].removed), out.edge_limit)) plan[i] = min_cut[i];
  }
  if (!budget_ok(total(plan))) {
    if (budget_ok(total(min_cut))) {
      plan = min_cut;
    } else {
      out.infeasible = true;
      plan = residue;
    }
  }

  EdgeSet kept = m_h.as_set(static_cast<std::size_t>(g.m()));
  for (const auto& r : plan)
    for (EdgeId e : r.removed) kept.erase(e);
  out.reduced = validate_matching(g, kept);
  out.removed_weight = m_h.weight - out.reduced.weight;
  out.components = std::move(plan);
  out.weight_bound_ok = budget_ok(out.removed_weight);
  // Re-derive the size bound from the actual difference rather than from the plan.
  out.size_bound_ok = true;
  for (const auto& c : decompose(m_l, out.reduced, g))
    if (c.augmenting() && static_cast<std::int64_t>(c.size()) > out.edge_limit) out.size_bound_ok = false;
  return out;
}

}  // namespace stochmatch
