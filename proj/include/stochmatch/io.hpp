#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "algorithms.hpp"
#include "components.hpp"
#include "error.hpp"
#include "graph.hpp"

namespace stochmatch {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Edge-list text format
//
//   # comment
//   n <count> m <count>
//   u v w [p]
//
// `p` may be omitted when a default probability is supplied.

inline WeightedGraph parse_edge_list(std::istream& in, std::optional<double> default_p = std::nullopt,
                                     const std::string& source = "<input>") {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::int64_t n = 0, m = 0;
  std::vector<EdgeSpec> edges;
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::BadFormat, source + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    if (!have_header) {
      std::string kn, km;
      if (!(ss >> kn >> n >> km >> m) || kn != "n" || km != "m" || n < 0 || m < 0)
        throw fail("expected header 'n <count> m <count>'");
      have_header = true;
      continue;
    }
    EdgeSpec e;
    if (!(ss >> e.u >> e.v >> e.w)) throw fail("expected 'u v w [p]'");
    double p;
    if (ss >> p) {
      e.p = p;
    } else if (default_p) {
      e.p = *default_p;
    } else {
      throw fail("edge has no probability and no default p was given");
    }
    std::string extra;
    if (ss >> extra) throw fail("trailing token '" + extra + "'");
    edges.push_back(e);
  }
  if (!have_header) throw fail("missing header");
  if (static_cast<std::int64_t>(edges.size()) != m)
    throw Error(ErrorCode::BadFormat, source + ": header declares m=" + std::to_string(m) + " but found " +
                                          std::to_string(edges.size()) + " edges");
  return build_graph(static_cast<std::int32_t>(n), edges);
}

inline WeightedGraph read_edge_list(const std::string& path, std::optional<double> default_p = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_edge_list(in, default_p, path);
}

inline std::string format_probability(double p) {
  std::ostringstream ss;
  ss << std::setprecision(17) << p;
  return ss.str();
}

inline void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  out << "n " << g.n() << " m " << g.m() << "\n";
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << e.w << ' ' << format_probability(e.p) << "\n";
}

// ---------------------------------------------------------------------------
// JSON helpers

inline std::string wide_to_string(Wide v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::string s;
  while (u) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

/// Integers that fit in 64 bits are JSON numbers; wider ones are strings.
inline json wide_to_json(Wide v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
    return static_cast<std::int64_t>(v);
  return wide_to_string(v);
}

inline Wide wide_from_json(const json& j) {
  if (j.is_number_integer()) return Wide{j.get<std::int64_t>()};
  const std::string s = j.get<std::string>();
  Wide v = 0;
  bool neg = false;
  std::size_t i = 0;
  if (!s.empty() && s[0] == '-') {
    neg = true;
    i = 1;
  }
  if (i == s.size()) throw Error(ErrorCode::BadFormat, "bad integer '" + s + "'");
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw Error(ErrorCode::BadFormat, "bad integer '" + s + "'");
    v = v * 10 + (s[i] - '0');
  }
  return neg ? -v : v;
}

/// {shape, edge_ids, delta, L_num, L_den, alpha}; L_* and alpha are null for
/// non-augmenting components.
inline json component_to_json(const AlternatingComponent& c) {
  json j;
  j["shape"] = to_string(c.shape);
  j["edge_ids"] = c.edges;
  j["delta"] = c.delta;
  if (auto L = c.norm_length()) {
    j["L_num"] = L->num;
    j["L_den"] = L->den;
    j["alpha"] = compute_alpha(c);
  } else {
    j["L_num"] = nullptr;
    j["L_den"] = nullptr;
    j["alpha"] = nullptr;
  }
  return j;
}

inline json reduction_to_json(const ComponentReduction& r) {
  json j = component_to_json(r.component);
  j["alpha"] = r.alpha == 0 ? json(nullptr) : json(r.alpha);
  j["removed"] = r.removed;
  j["removed_weight"] = r.removed_weight;
  j["strategy"] = r.strategy;
  return j;
}

inline json certificates_to_json(const CertificateReport& c) {
  json j;
  j["obs1_ok"] = c.obs1_ok;
  j["realized_opt"] = c.realized_opt;
  j["lemma2_premise"] = c.lemma2_premise;
  j["lemma2_ok"] = c.lemma2_ok;
  j["lemma2_lhs"] = wide_to_json(c.lemma2_lhs);
  j["lemma2_rhs"] = wide_to_json(c.lemma2_rhs);
  j["u_r_size"] = c.u_r_size;
  j["short_count"] = c.short_count;
  j["short_delta_sum"] = c.short_delta_sum;
  return j;
}

inline CertificateReport certificates_from_json(const json& j) {
  CertificateReport c;
  c.obs1_ok = j.at("obs1_ok").get<bool>();
  c.realized_opt = j.at("realized_opt").get<Weight>();
  c.lemma2_premise = j.at("lemma2_premise").get<bool>();
  c.lemma2_ok = j.at("lemma2_ok").get<bool>();
  c.lemma2_lhs = wide_from_json(j.at("lemma2_lhs"));
  c.lemma2_rhs = wide_from_json(j.at("lemma2_rhs"));
  c.u_r_size = j.at("u_r_size").get<std::int64_t>();
  c.short_count = j.at("short_count").get<std::int64_t>();
  c.short_delta_sum = j.at("short_delta_sum").get<Weight>();
  return c;
}

/// One JSON-lines trace record.
inline json round_to_json(const RoundRecord& rec, std::uint64_t trial, Rational eps) {
  json j;
  j["trial"] = trial;
  j["r"] = rec.r;
  j["eps"] = eps.str();
  j["m_r"] = rec.m_r.edge_ids;
  j["m_r_weight"] = rec.m_r.weight;
  j["m_r_realized"] = rec.m_r_realized.ids();
  j["m_r_failed"] = rec.m_r_failed.ids();
  j["e_star_after"] = rec.e_star_after.ids();
  j["o_prev"] = rec.o_prev.edge_ids;
  j["o_prev_weight"] = rec.o_prev.weight;
  j["o_r_weight"] = rec.o_r_weight;
  j["new_queries"] = rec.new_queries;
  j["certificates"] = rec.certificates ? certificates_to_json(*rec.certificates) : json(nullptr);
  return j;
}

struct TraceVerification {
  std::size_t records = 0;
  std::size_t certified_rounds = 0;
  std::size_t lemma2_premise_rounds = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// Re-checks a JSON-lines trace. Without a graph, structural invariants and
/// the certificate arithmetic are recomputed from the stored raw fields.
/// With a graph, matchings and weights are re-validated and the
/// certificates are re-derived from the edge ids.
inline TraceVerification verify_trace(std::istream& in, const WeightedGraph* g = nullptr) {
  TraceVerification out;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::uint64_t> trial;
  Weight last_o = 0;
  auto fail = [&](const std::string& why) { out.failures.push_back("line " + std::to_string(lineno) + ": " + why); };
  auto as_sorted = [](std::vector<EdgeId> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      fail(std::string("unparsable JSON: ") + e.what());
      continue;
    }
    try {
      ++out.records;
      const auto t = j.at("trial").get<std::uint64_t>();
      const Rational eps = parse_rational(j.at("eps").get<std::string>());
      const auto m_r = j.at("m_r").get<std::vector<EdgeId>>();
      const auto tr = j.at("m_r_realized").get<std::vector<EdgeId>>();
      const auto fl = j.at("m_r_failed").get<std::vector<EdgeId>>();
      const auto es = j.at("e_star_after").get<std::vector<EdgeId>>();
      const auto m_w = j.at("m_r_weight").get<Weight>();
      const auto o_prev = j.at("o_prev").get<std::vector<EdgeId>>();
      const auto o_prev_w = j.at("o_prev_weight").get<Weight>();
      const auto o_r_w = j.at("o_r_weight").get<Weight>();

      if (!trial || *trial != t) {
        trial = t;
        last_o = 0;
      }
      std::vector<EdgeId> both = tr;
      both.insert(both.end(), fl.begin(), fl.end());
      if (as_sorted(both) != as_sorted(m_r)) fail("M_r^T ∪ M_r^F differs from M_r");
      for (EdgeId e : fl)
        if (std::binary_search(es.begin(), es.end(), e)) fail("failed edge " + std::to_string(e) + " still in E*");
      if (o_prev_w != last_o) fail("O_{r-1} weight does not match previous round's O_r");
      if (o_r_w < last_o) fail("w(O_r) decreased");
      last_o = o_r_w;

      if (g) {
        Matching mr = validate_matching(*g, m_r);
        Matching op = validate_matching(*g, o_prev);
        if (mr.weight != m_w) fail("m_r_weight mismatch");
        if (op.weight != o_prev_w) fail("o_prev_weight mismatch");
        if (!j.at("certificates").is_null()) {
          const auto stored = certificates_from_json(j.at("certificates"));
          const auto fresh = certify_round(*g, op, mr, stored.realized_opt, eps);
          if (fresh.obs1_ok != stored.obs1_ok || fresh.lemma2_ok != stored.lemma2_ok ||
              fresh.lemma2_premise != stored.lemma2_premise || fresh.lemma2_lhs != stored.lemma2_lhs ||
              fresh.lemma2_rhs != stored.lemma2_rhs || fresh.short_count != stored.short_count ||
              fresh.u_r_size != stored.u_r_size)
            fail("certificate differs from recomputation on the graph");
        }
      }
      if (!j.at("certificates").is_null()) {
        const auto c = certificates_from_json(j.at("certificates"));
        ++out.certified_rounds;
        if (c.lemma2_premise) ++out.lemma2_premise_rounds;
        if (!certificate_consistent(c, m_w, o_prev_w, eps)) fail("certificate booleans inconsistent with raw fields");
        if (!c.obs1_ok) fail("trial " + std::to_string(t) + ": realized-optimum certificate failed");
        if (!c.lemma2_ok) fail("trial " + std::to_string(t) + ": short-component certificate failed");
      }
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  return out;
}

}  // namespace stochmatch
