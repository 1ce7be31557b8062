#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "components.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "rational.hpp"
#include "solver.hpp"
#include "stochastic.hpp"

namespace stochmatch {

/// Per-round certificate evaluation. All comparisons are exact integers.
struct CertificateReport {
  /// w(M_r) >= w(M(𝔈)) for the trial's realization.
  bool obs1_ok = true;
  Weight realized_opt = 0;
  /// w(O_{r-1}) < (1 - eps) w(M_r), i.e. den*w(O) < (den - num)*w(M_r).
  bool lemma2_premise = false;
  /// Premise false, or lhs >= rhs.
  bool lemma2_ok = true;
  /// 2*den * Σ_{C ∈ U_r, L_C < 2/eps} Δ_C
  Wide lemma2_lhs = 0;
  /// num * w(M_r)
  Wide lemma2_rhs = 0;
  std::int64_t u_r_size = 0;
  std::int64_t short_count = 0;
  Weight short_delta_sum = 0;

  bool all_ok() const { return obs1_ok && lemma2_ok; }
};

/// Evaluates the short-component certificate for base matching `o_prev` and
/// round matching `m_r`.
inline CertificateReport certify_round(const WeightedGraph& g, const Matching& o_prev, const Matching& m_r,
                                       Weight realized_opt, Rational eps) {
  CertificateReport c;
  c.realized_opt = realized_opt;
  c.obs1_ok = m_r.weight >= realized_opt;
  c.lemma2_premise = Wide{eps.den} * o_prev.weight < Wide{eps.den - eps.num} * m_r.weight;
  for (const auto& comp : decompose(o_prev, m_r, g)) {
    if (!comp.augmenting()) continue;
    ++c.u_r_size;
    // L_C < 2/eps  <=>  w(Q_C) * num < 2 * den * Δ_C
    if (Wide{comp.aug_weight} * eps.num < Wide{2} * eps.den * comp.delta) {
      ++c.short_count;
      c.short_delta_sum += comp.delta;
    }
  }
  c.lemma2_lhs = Wide{2} * eps.den * c.short_delta_sum;
  c.lemma2_rhs = Wide{eps.num} * m_r.weight;
  c.lemma2_ok = !c.lemma2_premise || c.lemma2_lhs >= c.lemma2_rhs;
  return c;
}

/// Recomputes the certificate booleans from the stored raw fields.
inline bool certificate_consistent(const CertificateReport& c, Weight m_r_weight, Weight o_prev_weight, Rational eps) {
  const bool obs1 = m_r_weight >= c.realized_opt;
  const bool premise = Wide{eps.den} * o_prev_weight < Wide{eps.den - eps.num} * m_r_weight;
  const bool lemma2 = !premise || c.lemma2_lhs >= c.lemma2_rhs;
  return obs1 == c.obs1_ok && premise == c.lemma2_premise && lemma2 == c.lemma2_ok &&
         c.lemma2_lhs == Wide{2} * eps.den * c.short_delta_sum && c.lemma2_rhs == Wide{eps.num} * m_r_weight;
}

struct RoundRecord {
  std::int64_t r = 0;
  Matching m_r;
  EdgeSet m_r_realized;  // M_r^T
  EdgeSet m_r_failed;    // M_r^F
  EdgeSet e_star_after;
  Matching o_prev;  // O_{r-1}
  Weight o_r_weight = 0;
  std::int64_t new_queries = 0;
  std::optional<CertificateReport> certificates;
};

struct AdaptiveResult {
  Matching final_matching;
  std::vector<RoundRecord> rounds;
  std::int32_t max_per_vertex_queries = 0;
  std::size_t queries = 0;
  /// Round after which nothing new could be queried, if the run stopped early.
  std::optional<std::int64_t> early_exit;
  Weight realized_opt = 0;

  bool certificates_ok() const {
    for (const auto& r : rounds)
      if (r.certificates && !r.certificates->all_ok()) return false;
    return true;
  }
};

struct AdaptiveOptions {
  bool certificates = true;
  bool early_exit = true;
};

/// Adaptive rounds: pick a maximum-weight matching of the not-yet-refuted
/// edges, query it, drop the failures; finally return the best matching of
/// the realized queried edges.
///
/// A round whose matching contains no unqueried edge would repeat forever
/// (the solver is deterministic and E* no longer changes), so the run stops
/// there when `early_exit` is set; the output is unaffected.
inline AdaptiveResult adaptive_run(const WeightedGraph& g, const Realization& realization, std::int64_t rounds,
                                   Rational eps, AdaptiveOptions opts = {}) {
  if (rounds < 0) throw Error(ErrorCode::BadConfig, "rounds must be >= 0");
  if (opts.certificates) checked_epsilon(eps);
  AdaptiveResult out;
  QueryLedger ledger(g);
  EdgeSet e_star = g.all_edges();
  Matching o_prev;
  if (opts.certificates) out.realized_opt = max_weight_matching(g, realization.realized).weight;

  for (std::int64_t r = 1; r <= rounds; ++r) {
    RoundRecord rec;
    rec.r = r;
    rec.m_r = max_weight_matching(g, e_star);
    const EdgeSet picked = rec.m_r.as_set(static_cast<std::size_t>(g.m()));
    const EdgeSet fresh = picked - ledger.queried();
    rec.new_queries = static_cast<std::int64_t>(fresh.count());
    ledger.query(realization, picked);
    rec.m_r_realized = picked & realization.realized;
    rec.m_r_failed = picked - realization.realized;
    e_star -= rec.m_r_failed;
    rec.e_star_after = e_star;
    rec.o_prev = o_prev;
    if (opts.certificates) rec.certificates = certify_round(g, o_prev, rec.m_r, out.realized_opt, eps);
    Matching o_r = max_weight_matching(g, ledger.known_realized());
    rec.o_r_weight = o_r.weight;
    o_prev = std::move(o_r);
    out.rounds.push_back(std::move(rec));
    if (opts.early_exit && fresh.empty()) {
      out.early_exit = r;
      break;
    }
  }
  out.final_matching = o_prev;
  out.max_per_vertex_queries = ledger.max_per_vertex();
  out.queries = ledger.query_count();
  return out;
}

/// R = ceil(4 / (eps * p_min^(4/eps))), capped at `cap`.
inline std::int64_t default_rounds(Rational eps, double p_min, std::int64_t cap = 1'000'000) {
  checked_epsilon(eps);
  if (!(p_min > 0.0 && p_min <= 1.0)) throw Error(ErrorCode::BadProbability, "p_min must lie in (0,1]");
  const double e = eps.to_double();
  const double r = 4.0 / (e * std::pow(p_min, 4.0 / e));
  if (!std::isfinite(r) || r >= static_cast<double>(cap)) return cap;
  return static_cast<std::int64_t>(std::ceil(r));
}

/// Selection state of the non-adaptive algorithm: H_r and the round matchings.
struct NonAdaptiveState {
  EdgeSet h;  // H_R
  std::vector<Matching> rounds;

  EdgeSet n_rest() const { return h.complement(); }  // N_R = E \ H_R
  std::int32_t max_degree(const WeightedGraph& g) const {
    std::vector<std::int32_t> deg(static_cast<std::size_t>(g.n()), 0);
    std::int32_t best = 0;
    for (EdgeId e : h.ids()) {
      best = std::max(best, ++deg[static_cast<std::size_t>(g.edge(e).u)]);
      best = std::max(best, ++deg[static_cast<std::size_t>(g.edge(e).v)]);
    }
    return best;
  }
};

/// R rounds of "take a maximum-weight matching of what is left and remove it".
/// Never looks at a realization. Stops early once the remainder has no
/// positive-weight matching.
inline NonAdaptiveState nonadaptive_select(const WeightedGraph& g, std::int64_t rounds) {
  if (rounds < 0) throw Error(ErrorCode::BadConfig, "rounds must be >= 0");
  NonAdaptiveState st{g.no_edges(), {}};
  EdgeSet rest = g.all_edges();
  for (std::int64_t r = 1; r <= rounds; ++r) {
    Matching m = max_weight_matching(g, rest);
    if (m.empty()) break;
    const EdgeSet ms = m.as_set(static_cast<std::size_t>(g.m()));
    rest -= ms;
    st.h |= ms;
    st.rounds.push_back(std::move(m));
  }
  return st;
}

/// 𝕄[H] by Monte Carlo: mean of w(M(H ∩ 𝔈_i)).
inline Estimate evaluate_subgraph(const WeightedGraph& g, const EdgeSet& h, std::size_t trials, std::uint64_t seed) {
  return expected_matching_mc(g, h, trials, seed, "alg");
}

struct SuperadditivityCertificate {
  Weight w1 = 0, w2 = 0, w_all = 0;
  bool holds = false;
};

/// w(M(E1)) + w(M(E2)) >= w(M(E)) for E1 ∪ E2 = E.
inline SuperadditivityCertificate check_superadditivity(const WeightedGraph& g, const EdgeSet& e1, const EdgeSet& e2,
                                                        const std::optional<EdgeSet>& universe = std::nullopt) {
  const EdgeSet all = universe ? *universe : g.all_edges();
  if (!((e1 | e2) == all)) throw Error(ErrorCode::CoverageViolation, "E1 ∪ E2 does not cover E");
  SuperadditivityCertificate c;
  c.w1 = max_weight_matching(g, e1).weight;
  c.w2 = max_weight_matching(g, e2).weight;
  c.w_all = max_weight_matching(g, all).weight;
  c.holds = c.w1 + c.w2 >= c.w_all;
  return c;
}

/// How check_next_is_half evaluates expectations.
struct ExpectationBudget {
  bool allow_mc = false;
  std::size_t trials = 10'000;
  std::uint64_t seed = 0;
};

struct NextIsHalfCertificate {
  bool exact = true;
  double m_e = 0.0;         // 𝕄[E]
  double m_e_se = 0.0;
  double m_h_prev = 0.0;    // 𝕄[H_{r-1}]
  double m_h_prev_se = 0.0;
  Weight next_weight = 0;   // w(M(E \ H_{r-1}))
  bool premise = false;     // 𝕄[H_{r-1}] < 𝕄[E] / 2
  bool holds = true;        // premise => next_weight >= 𝕄[E] / 2
};

/// If 𝕄[H_{r-1}] < 𝕄[E]/2 then the next round's matching weighs at least 𝕄[E]/2.
/// Exact enumeration when both edge sets have <= 20 edges; otherwise Monte
/// Carlo if allowed, comparing with a 3-standard-error allowance.
inline NextIsHalfCertificate check_next_is_half(const WeightedGraph& g, const EdgeSet& h_prev,
                                                const ExpectationBudget& budget = {}) {
  NextIsHalfCertificate c;
  const EdgeSet all = g.all_edges();
  const bool fits = all.count() <= kExactEnumerationLimit;
  c.next_weight = max_weight_matching(g, all - h_prev).weight;
  if (fits) {
    c.m_e = expected_matching_exact(g, all);
    c.m_h_prev = expected_matching_exact(g, h_prev);
    // Tiny relative slack for float summation only.
    const double tol = 1e-9 * std::max(1.0, c.m_e);
    c.premise = c.m_h_prev < c.m_e / 2 - tol;
    c.holds = !c.premise || static_cast<double>(c.next_weight) >= c.m_e / 2 - tol;
    return c;
  }
  if (!budget.allow_mc) throw Error(ErrorCode::TooLarge, "graph too large for exact expectations; enable MC fallback");
  c.exact = false;
  auto e_all = expected_matching_mc(g, all, budget.trials, budget.seed, "next_half_E");
  auto e_h = expected_matching_mc(g, h_prev, budget.trials, budget.seed, "next_half_H");
  c.m_e = e_all.mean;
  c.m_e_se = e_all.standard_error;
  c.m_h_prev = e_h.mean;
  c.m_h_prev_se = e_h.standard_error;
  const double slack = 3.0 * std::hypot(c.m_e_se / 2, c.m_h_prev_se);
  c.premise = c.m_h_prev + slack < c.m_e / 2;
  c.holds = !c.premise || static_cast<double>(c.next_weight) + 3.0 * c.m_e_se / 2 >= c.m_e / 2;
  return c;
}

}  // namespace stochmatch
