#include <gtest/gtest.h>

#include <map>

#include "support.hpp"

namespace {

using namespace stochmatch;
using testing_support::component_instance;
using testing_support::ComponentInstance;
using testing_support::only_component;
using testing_support::random_component_instance;
using testing_support::random_graph;
using testing_support::random_matching;

Matching ids(const WeightedGraph& g, std::vector<EdgeId> v) { return validate_matching(g, v); }

// Path a-b-c: ab id 0, bc id 1.
WeightedGraph path_ab_bc(Weight ab, Weight bc) { return build_graph(3, {{0, 1, ab, 0.5}, {1, 2, bc, 0.5}}); }

TEST(Decompose, PositiveValue) {
  auto g = path_ab_bc(5, 8);
  auto comps = decompose(ids(g, {0}), ids(g, {1}), g);
  ASSERT_EQ(comps.size(), 1u);
  EXPECT_EQ(comps[0].base, std::vector<EdgeId>{0});
  EXPECT_EQ(comps[0].aug, std::vector<EdgeId>{1});
  EXPECT_EQ(comps[0].delta, 3);
  ASSERT_TRUE(comps[0].norm_length());
  EXPECT_EQ(comps[0].norm_length()->num, 8);
  EXPECT_EQ(comps[0].norm_length()->den, 3);
}

TEST(Decompose, NegativeValueHasNoLength) {
  auto g = path_ab_bc(9, 8);
  auto comps = decompose(ids(g, {0}), ids(g, {1}), g);
  ASSERT_EQ(comps.size(), 1u);
  EXPECT_EQ(comps[0].delta, -1);
  EXPECT_FALSE(comps[0].norm_length());
  EXPECT_FALSE(comps[0].augmenting());
}

TEST(Decompose, SingleHeavyEdge) {
  auto g = build_graph(2, {{0, 1, 7, 0.5}});
  auto comps = decompose(ids(g, {}), ids(g, {0}), g);
  ASSERT_EQ(comps.size(), 1u);
  EXPECT_TRUE(comps[0].base.empty());
  EXPECT_EQ(comps[0].delta, 7);
  EXPECT_EQ(comps[0].norm_length()->num, 7);
  EXPECT_EQ(comps[0].norm_length()->den, 7);
}

TEST(Augment, Examples) {
  auto g = path_ab_bc(5, 8);
  auto c = decompose(ids(g, {0}), ids(g, {1}), g)[0];
  auto m = augment(ids(g, {0}), c, g);
  EXPECT_EQ(m.edge_ids, std::vector<EdgeId>{1});
  EXPECT_EQ(m.weight, 8);

  auto g2 = path_ab_bc(9, 8);
  auto c2 = decompose(ids(g2, {0}), ids(g2, {1}), g2)[0];
  EXPECT_EQ(augment(ids(g2, {0}), c2, g2).weight, 8);

  // Q_C = {bc} collides with a retained M_L edge cd.
  auto g3 = build_graph(4, {{0, 1, 5, 0.5}, {1, 2, 8, 0.5}, {2, 3, 1, 0.5}});
  auto c3 = decompose(ids(g3, {0}), ids(g3, {1}), g3)[0];
  try {
    augment(ids(g3, {0, 2}), c3, g3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAugmentable);
  }
}

TEST(Augment, WeightChangesByValue) {
  SplitMix rng(4);
  for (int iter = 0; iter < 300; ++iter) {
    auto g = random_graph(rng, static_cast<std::int32_t>(rng.uniform(2, 12)), 0.5, 0, 50);
    auto ml = random_matching(rng, g, 0.7), mh = random_matching(rng, g, 0.7);
    for (const auto& c : decompose(ml, mh, g)) {
      auto m = augment(ml, c, g);
      EXPECT_EQ(m.weight, ml.weight + c.delta);
    }
  }
}

TEST(Component, InvariantsOnRandomPairs) {
  SplitMix rng(41);
  for (int iter = 0; iter < 300; ++iter) {
    auto g = random_graph(rng, static_cast<std::int32_t>(rng.uniform(2, 12)), 0.5, 0, 50);
    auto ml = random_matching(rng, g, 0.7), mh = random_matching(rng, g, 0.7);
    const auto sl = ml.as_set(static_cast<std::size_t>(g.m()));
    for (const auto& c : decompose(ml, mh, g)) {
      EXPECT_EQ(c.base.size() + c.aug.size(), c.size());
      Weight wq = 0, wb = 0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_EQ(c.weights[i], g.edge(c.edges[i]).w);
        EXPECT_EQ(static_cast<bool>(c.is_aug[i]), !sl.contains(c.edges[i]));
        if (i + 1 < c.size()) {
          EXPECT_NE(c.is_aug[i], c.is_aug[i + 1]);
        }
        (c.is_aug[i] ? wq : wb) += c.weights[i];
      }
      EXPECT_EQ(c.delta, wq - wb);
      if (c.augmenting()) {
        EXPECT_GE(c.norm_length()->num, c.norm_length()->den);
      }
    }
  }
}

TEST(LabelEdges, Cases) {
  auto g1 = build_graph(2, {{0, 1, 8, 0.5}});
  auto l1 = label_edges(decompose(ids(g1, {}), ids(g1, {0}), g1)[0]);
  EXPECT_EQ(l1.label_case, 1);
  EXPECT_EQ(l1.q, std::vector<EdgeId>{0});
  EXPECT_TRUE(l1.b.empty());

  auto g2 = path_ab_bc(1, 8);
  auto l2 = label_edges(decompose(ids(g2, {0}), ids(g2, {1}), g2)[0]);
  EXPECT_EQ(l2.label_case, 2);
  EXPECT_EQ(l2.b, std::vector<EdgeId>{0});
  EXPECT_EQ(l2.q, std::vector<EdgeId>{1});

  // 4-cycle e1..e4 = ids 0..3; M_H = {e2, e4}.
  auto g3 = build_graph(4, {{0, 1, 1, 0.5}, {1, 2, 1, 0.5}, {2, 3, 1, 0.5}, {3, 0, 1, 0.5}});
  auto l3 = label_edges(decompose(ids(g3, {0, 2}), ids(g3, {1, 3}), g3)[0]);
  EXPECT_EQ(l3.label_case, 3);
  EXPECT_EQ(l3.q.front(), 1);
  EXPECT_EQ(l3.q.size(), 2u);
  EXPECT_EQ(l3.b.size(), 2u);
}

TEST(LabelEdges, InterleavingReproducesTraversal) {
  SplitMix rng(43);
  for (int iter = 0; iter < 500; ++iter) {
    auto ci = random_component_instance(rng, 14, 20);
    auto c = only_component(ci);
    auto lc = label_edges(c);
    auto inter = lc.interleaved();
    ASSERT_EQ(inter.size(), c.size());
    if (c.shape == Shape::Path) {
      EXPECT_EQ(inter, c.edges);
    } else {
      // Same cyclic sequence, rotated to the smallest augmenting id.
      auto it = std::find(c.edges.begin(), c.edges.end(), inter[0]);
      std::vector<EdgeId> rotated(it, c.edges.end());
      rotated.insert(rotated.end(), c.edges.begin(), it);
      EXPECT_EQ(inter, rotated);
      EXPECT_EQ(inter[0], *std::min_element(c.aug.begin(), c.aug.end()));
    }
  }
}

LabeledComponent labeled_path(const std::vector<Weight>& q_weights) {
  // q1 b1 q2 b2 ... qk with base weight 1.
  std::vector<Weight> w;
  for (std::size_t i = 0; i < q_weights.size(); ++i) {
    if (i) w.push_back(1);
    w.push_back(q_weights[i]);
  }
  return label_edges(only_component(component_instance(Shape::Path, w, true)));
}

TEST(DeletionPartition, EqualWeights) {
  auto dp = deletion_partition(labeled_path({2, 2, 2}), 3);
  ASSERT_EQ(dp.parts.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(dp.parts[i].size(), 1u);
    EXPECT_EQ(dp.part_weight[i], 2);
  }
  EXPECT_EQ(dp.chosen_index, 1u);
  EXPECT_TRUE(dp.claim_holds());
}

TEST(DeletionPartition, LighterSecondPart) {
  auto dp = deletion_partition(labeled_path({5, 1}), 2);
  EXPECT_EQ(dp.part_weight, (std::vector<Weight>{5, 1}));
  EXPECT_EQ(dp.chosen_index, 2u);
  EXPECT_TRUE(dp.claim_holds());
}

TEST(DeletionPartition, AlphaBeyondK) {
  auto dp = deletion_partition(labeled_path({4}), 6);
  EXPECT_EQ(dp.alpha, 6);
  EXPECT_EQ(dp.chosen_weight(), 0);
  EXPECT_TRUE(dp.chosen().empty());
  EXPECT_EQ(dp.chosen_index, 2u);
}

// Lightest-class bound and the partition property, exhaustively over α in [1, 2k].
TEST(DeletionPartition, LightestClassBoundRandom) {
  SplitMix rng(47);
  for (int iter = 0; iter < 1000; ++iter) {
    auto lc = label_edges(only_component(random_component_instance(rng, 24, 1000)));
    const auto k = static_cast<std::int64_t>(lc.k());
    for (std::int64_t alpha = 1; alpha <= 2 * k; ++alpha) {
      auto dp = deletion_partition(lc, alpha);
      // Independent recomputation of every residue class weight.
      Weight best = std::numeric_limits<Weight>::max();
      std::map<EdgeId, int> cover;
      for (std::int64_t i = 1; i <= alpha; ++i) {
        Weight w = 0;
        for (std::int64_t j = i; j <= k; j += alpha) w += lc.q_weight[static_cast<std::size_t>(j - 1)];
        best = std::min(best, w);
        if (static_cast<std::size_t>(i) <= dp.parts.size()) {
          EXPECT_EQ(dp.part_weight[static_cast<std::size_t>(i - 1)], w);
          for (EdgeId e : dp.parts[static_cast<std::size_t>(i - 1)]) ++cover[e];
        }
      }
      EXPECT_EQ(dp.chosen_weight(), best);
      EXPECT_LE(Wide{best} * alpha, Wide{lc.q_total()});
      EXPECT_TRUE(dp.claim_holds());
      ASSERT_EQ(cover.size(), lc.q.size());
      for (auto [e, n] : cover) {
        EXPECT_EQ(n, 1);
      }
    }
  }
}

TEST(ComputeAlpha, Examples) {
  // w(Q)=6, Δ=4: q(6) against b(2).
  auto g1 = path_ab_bc(2, 6);
  EXPECT_EQ(compute_alpha(decompose(ids(g1, {0}), ids(g1, {1}), g1)[0]), 3);
  auto g2 = path_ab_bc(5, 8);
  EXPECT_EQ(compute_alpha(decompose(ids(g2, {0}), ids(g2, {1}), g2)[0]), 6);
  auto g3 = path_ab_bc(8, 8);
  try {
    compute_alpha(decompose(ids(g3, {0}), ids(g3, {1}), g3)[0]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAugmenting);
  }
}

TEST(SplitComponent, RemoveMiddleAugmentingEdge) {
  auto c = only_component(component_instance(Shape::Path, {2, 1, 2, 1, 2}, true));
  auto dp = deletion_partition(label_edges(c), 3);
  dp.chosen_index = 2;  // D_2 = {q2}
  auto split = split_component(c, dp);
  ASSERT_EQ(split.fragments.size(), 2u);
  EXPECT_EQ(split.fragments[0].edges, (std::vector<EdgeId>{0, 1}));
  EXPECT_EQ(split.fragments[0].delta, 1);
  EXPECT_EQ(split.fragments[1].edges, (std::vector<EdgeId>{3, 4}));
  EXPECT_EQ(split.fragments[1].delta, 1);
  EXPECT_EQ(split.delta_sum(), 2);
  EXPECT_EQ(split.delta_sum(), c.delta - dp.chosen_weight());
}

TEST(SplitComponent, EmptyRemovalKeepsComponent) {
  auto c = only_component(component_instance(Shape::Path, {4}, true));
  auto dp = deletion_partition(label_edges(c), 6);
  auto split = split_component(c, dp);
  ASSERT_EQ(split.fragments.size(), 1u);
  EXPECT_EQ(split.fragments[0].edges, c.edges);
  EXPECT_EQ(split.delta_sum(), c.delta);
}

TEST(SplitComponent, RemovingOnlyEdgeLeavesNothing) {
  auto c = only_component(component_instance(Shape::Path, {4}, true));
  auto dp = deletion_partition(label_edges(c), 1);
  auto split = split_component(c, dp);
  EXPECT_TRUE(split.fragments.empty());
  EXPECT_EQ(split.delta_sum(), 0);
  EXPECT_EQ(c.delta - split.removed_weight, 0);
}

// Split accounting, the half-value bound with α = ceil(2 L_C), and the
// fragment bound where it is provable (paths, and cycles with α | k).
TEST(SplitComponent, AccountingAndHalfValueRandom) {
  SplitMix rng(53);
  int augmenting = 0;
  while (augmenting < 1000) {
    auto c = only_component(random_component_instance(rng, 30, 100));
    if (!c.augmenting()) continue;
    ++augmenting;
    const auto alpha = compute_alpha(c);
    auto lc = label_edges(c);
    auto dp = deletion_partition(lc, alpha);
    auto split = split_component(c, dp);
    EXPECT_EQ(split.delta_sum() + dp.chosen_weight(), c.delta);
    EXPECT_EQ(split.removed_weight, dp.chosen_weight());
    // Σ Δ_j >= Δ - w(Q)/α >= Δ/2, both cross-multiplied.
    EXPECT_GE(Wide{split.delta_sum()} * alpha, Wide{c.delta} * alpha - c.aug_weight);
    EXPECT_TRUE(split_keeps_half(c, split));
    EXPECT_GE(Wide{2} * split.delta_sum(), Wide{c.delta});
    const bool provable = c.shape == Shape::Path || static_cast<std::int64_t>(lc.k()) % alpha == 0 ||
                          static_cast<std::int64_t>(lc.k()) < alpha;
    if (provable) {
      EXPECT_LE(static_cast<std::int64_t>(split.max_fragment_aug_edges()), alpha);
    }
    // Fragments are vertex-disjoint paths of the original component.
    std::map<EdgeId, int> seen;
    for (const auto& f : split.fragments) {
      if (!split.removed.empty()) {
        EXPECT_EQ(f.shape, Shape::Path);
      }
      for (EdgeId e : f.edges) ++seen[e];
    }
    for (auto [e, n] : seen) {
      EXPECT_EQ(n, 1);
    }
    EXPECT_EQ(seen.size() + split.removed.size(), c.size());
  }
}

// On a cycle whose length is not a multiple of α the run that wraps past
// q_k back to q_1 can hold more than α augmenting edges.
TEST(SplitComponent, CycleResidueClassCanLeaveLongRun) {
  // k = 5 augmenting edges, α = 3: D_1 = {q1,q4}, D_2 = {q2,q5}, D_3 = {q3}.
  auto c = only_component(component_instance(Shape::Cycle, {5, 1, 5, 1, 1, 1, 5, 1, 5, 1}, true));
  auto lc = label_edges(c);
  ASSERT_EQ(lc.k(), 5u);
  auto dp = deletion_partition(lc, 3);
  ASSERT_EQ(dp.chosen_index, 3u);
  auto split = split_component(c, dp);
  ASSERT_EQ(split.fragments.size(), 1u);
  EXPECT_EQ(split.max_fragment_aug_edges(), 4u);
  EXPECT_EQ(split.delta_sum() + dp.chosen_weight(), c.delta);
}

// Cheapest bounding cut against exhaustive search over subsets of Q_C.
TEST(MinBoundingCut, MatchesExhaustiveSearch) {
  SplitMix rng(59);
  int checked = 0;
  while (checked < 300) {
    auto c = only_component(random_component_instance(rng, 22, 30));
    if (!c.augmenting()) continue;
    const std::int64_t limit = rng.uniform(2, 8);
    if (static_cast<std::int64_t>(c.size()) <= limit) continue;
    ++checked;
    Weight best = std::numeric_limits<Weight>::max();
    const auto k = c.aug.size();
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      std::vector<EdgeId> removed;
      for (std::size_t j = 0; j < k; ++j)
        if (mask >> j & 1u) removed.push_back(c.aug[j]);
      auto split = remove_edges(c, removed);
      bool ok = true;
      for (const auto& f : split.fragments)
        if (f.augmenting() && static_cast<std::int64_t>(f.size()) > limit) ok = false;
      if (ok) best = std::min(best, split.removed_weight);
    }
    auto cut = detail::min_bounding_cut(c, limit);
    auto split = remove_edges(c, cut);
    EXPECT_EQ(split.removed_weight, best);
    for (const auto& f : split.fragments)
      if (f.augmenting()) {
        EXPECT_LE(static_cast<std::int64_t>(f.size()), limit);
      }
  }
}

TEST(DecomposeBounded, ShortComponentsUntouched) {
  auto ci = component_instance(Shape::Path, {1, 5, 1}, false);
  auto bd = decompose_bounded(ci.m_l, ci.m_h, ci.g, Rational{1, 2});
  EXPECT_EQ(bd.reduced, ci.m_h);
  EXPECT_TRUE(bd.size_bound_ok);
  EXPECT_TRUE(bd.weight_bound_ok);
}

TEST(DecomposeBounded, TenEdgePath) {
  // Unit weights: value 0, so nothing is augmenting and nothing is removed.
  auto unit = component_instance(Shape::Path, std::vector<Weight>(10, 1), true);
  auto bd = decompose_bounded(unit.m_l, unit.m_h, unit.g, Rational{1, 2});
  EXPECT_EQ(bd.reduced, unit.m_h);
  EXPECT_TRUE(bd.size_bound_ok && bd.weight_bound_ok);

  // Heavy side weight 2: augmenting, α = 4, lightest class D_2 = {q2}.
  auto heavy = component_instance(Shape::Path, {2, 1, 2, 1, 2, 1, 2, 1, 2, 1}, true);
  auto bd2 = decompose_bounded(heavy.m_l, heavy.m_h, heavy.g, Rational{1, 2});
  EXPECT_EQ(bd2.alpha, 4);
  EXPECT_EQ(bd2.edge_limit, 8);
  EXPECT_EQ(bd2.removed_weight, 2);
  EXPECT_EQ(bd2.reduced.edge_ids, (std::vector<EdgeId>{0, 4, 6, 8}));
  EXPECT_TRUE(bd2.size_bound_ok);
  EXPECT_TRUE(bd2.weight_bound_ok);
  for (const auto& c : decompose(heavy.m_l, bd2.reduced, heavy.g)) {
    EXPECT_LE(c.size(), 8u);
  }
  EXPECT_GE(4 * bd2.reduced.weight, 3 * heavy.m_h.weight);
}

TEST(DecomposeBounded, IdenticalMatchings) {
  auto ci = component_instance(Shape::Path, {3, 4, 5}, true);
  auto bd = decompose_bounded(ci.m_h, ci.m_h, ci.g, Rational{1, 4});
  EXPECT_EQ(bd.reduced, ci.m_h);
  EXPECT_TRUE(bd.components.empty());
}

TEST(DecomposeBounded, BadEpsilon) {
  auto ci = component_instance(Shape::Path, {3}, true);
  try {
    decompose_bounded(ci.m_l, ci.m_h, ci.g, Rational{3, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadEpsilon);
  }
}

// A 10-cycle with heavy side 10 and light side 1 at eps = 1/2: any removal
// within the eps/2 budget leaves an augmenting run of 9 > 8 edges.
TEST(DecomposeBounded, CycleWithNoValidReduction) {
  auto ci = component_instance(Shape::Cycle, {10, 1, 10, 1, 10, 1, 10, 1, 10, 1}, true);
  const Rational eps{1, 2};
  auto bd = decompose_bounded(ci.m_l, ci.m_h, ci.g, eps);
  EXPECT_TRUE(bd.infeasible);
  EXPECT_TRUE(bd.weight_bound_ok);
  EXPECT_FALSE(bd.size_bound_ok);
  // Exhaustive check that no subset of M_H meets both bounds.
  const auto& h = ci.m_h.edge_ids;
  for (std::uint32_t mask = 0; mask < (1u << h.size()); ++mask) {
    std::vector<EdgeId> kept;
    for (std::size_t j = 0; j < h.size(); ++j)
      if (mask >> j & 1u) kept.push_back(h[j]);
    auto mh2 = validate_matching(ci.g, kept);
    const bool weight_ok = 2 * eps.den * (ci.m_h.weight - mh2.weight) <= eps.num * ci.m_h.weight;
    bool size_ok = true;
    for (const auto& c : decompose(ci.m_l, mh2, ci.g))
      if (c.augmenting() && c.size() > 8) size_ok = false;
    EXPECT_FALSE(weight_ok && size_ok) << "mask " << mask;
  }
}

// Random triples: the weight bound always holds; the size bound holds unless
// the instance is reported infeasible, and infeasibility is confirmed by
// exhaustive search over subsets of M_H.
TEST(DecomposeBounded, RandomTriples) {
  SplitMix rng(61);
  const Rational eps_values[] = {{1, 2}, {1, 4}, {1, 8}};
  int infeasible = 0;
  for (int iter = 0; iter < 400; ++iter) {
    const Rational eps = eps_values[iter % 3];
    auto g = random_graph(rng, static_cast<std::int32_t>(rng.uniform(4, 28)), 0.25, 1, 100);
    auto mh = max_weight_matching(g);
    auto ml = random_matching(rng, g, 0.5);
    auto bd = decompose_bounded(ml, mh, g, eps);
    EXPECT_TRUE(bd.weight_bound_ok);
    EXPECT_GE(Wide{2} * eps.den * bd.reduced.weight, Wide{2 * eps.den - eps.num} * mh.weight);
    for (EdgeId e : bd.reduced.edge_ids) {
      EXPECT_TRUE(std::binary_search(mh.edge_ids.begin(), mh.edge_ids.end(), e));
    }
    if (bd.infeasible) {
      ++infeasible;
      continue;
    }
    EXPECT_TRUE(bd.size_bound_ok);
    for (const auto& c : decompose(ml, bd.reduced, g))
      if (c.augmenting()) {
        EXPECT_LE(static_cast<std::int64_t>(c.size()), bd.edge_limit);
      }
  }
  RecordProperty("infeasible_instances", infeasible);
}

// When every component is a path, the residue-class removal alone always
// satisfies both bounds.
TEST(DecomposeBounded, PathsAlwaysFeasible) {
  SplitMix rng(67);
  const Rational eps_values[] = {{1, 2}, {1, 4}, {1, 8}, {1, 3}, {2, 3}};
  for (int iter = 0; iter < 500; ++iter) {
    const Rational eps = eps_values[iter % 5];
    const auto len = rng.uniform(1, 60);
    std::vector<Weight> w(static_cast<std::size_t>(len));
    for (auto& x : w) x = rng.uniform(0, 100);
    auto ci = component_instance(Shape::Path, w, rng.unit() < 0.5);
    auto bd = decompose_bounded(ci.m_l, ci.m_h, ci.g, eps);
    EXPECT_FALSE(bd.infeasible);
    EXPECT_TRUE(bd.size_bound_ok);
    EXPECT_TRUE(bd.weight_bound_ok);
    for (const auto& r : bd.components) {
      EXPECT_NE(r.strategy, "min_cut");
    }
  }
}

}  // namespace
