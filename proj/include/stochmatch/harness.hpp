#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "algorithms.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "random.hpp"
#include "rational.hpp"
#include "stochastic.hpp"

namespace stochmatch {

// ---------------------------------------------------------------------------
// Generators

struct GeneratorSpec {
  std::string name;
  std::vector<std::string> args;

  std::string str() const {
    std::string s = name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
    return s + ")";
  }
};

inline GeneratorSpec parse_generator(const std::string& text) {
  auto bad = [&](const std::string& why) { return Error(ErrorCode::BadSpec, "'" + text + "': " + why); };
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
  const auto open = t.find('(');
  if (open == std::string::npos || t.empty() || t.back() != ')') throw bad("expected name(arg,...)");
  GeneratorSpec spec;
  spec.name = t.substr(0, open);
  std::string body = t.substr(open + 1, t.size() - open - 2);
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) spec.args.push_back(item);
  return spec;
}

namespace detail {

inline std::int64_t spec_int(const GeneratorSpec& s, std::size_t i, std::int64_t fallback, bool required) {
  if (i >= s.args.size()) {
    if (required) throw Error(ErrorCode::BadSpec, s.str() + ": missing argument " + std::to_string(i + 1));
    return fallback;
  }
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s.args[i], &used);
  } catch (...) {
    used = 0;
  }
  if (used != s.args[i].size()) throw Error(ErrorCode::BadSpec, s.str() + ": '" + s.args[i] + "' is not an integer");
  return v;
}

inline double spec_double(const GeneratorSpec& s, std::size_t i) {
  if (i >= s.args.size()) throw Error(ErrorCode::BadSpec, s.str() + ": missing argument " + std::to_string(i + 1));
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s.args[i], &used);
  } catch (...) {
    used = 0;
  }
  if (used != s.args[i].size()) throw Error(ErrorCode::BadSpec, s.str() + ": '" + s.args[i] + "' is not a number");
  return v;
}

}  // namespace detail

inline constexpr std::int64_t kDefaultWmax = 100;

/// star(k, w) | complete(n, wmax) | bipartite(a, b, density, wmax) | gnm(n, m, wmax).
/// Random weights are uniform integers in [1, wmax]; every edge gets probability p.
inline WeightedGraph gen_graph(const GeneratorSpec& spec, std::uint64_t seed, double p = 1.0) {
  SplitMix rng(seed);
  std::vector<EdgeSpec> edges;
  std::int32_t n = 0;
  auto check_wmax = [&](std::int64_t wmax) {
    if (wmax < 1) throw Error(ErrorCode::BadSpec, spec.str() + ": wmax must be >= 1");
  };
  auto nargs = [&](std::size_t lo, std::size_t hi) {
    if (spec.args.size() < lo || spec.args.size() > hi)
      throw Error(ErrorCode::BadSpec, spec.str() + ": wrong number of arguments");
  };
  if (spec.name == "star") {
    nargs(1, 2);
    const auto k = detail::spec_int(spec, 0, 0, true);
    const auto w = detail::spec_int(spec, 1, 1, false);
    if (k < 0 || k > 1'000'000 || w < 0) throw Error(ErrorCode::BadSpec, spec.str() + ": bad star parameters");
    n = static_cast<std::int32_t>(k + 1);
    for (std::int32_t leaf = 1; leaf <= k; ++leaf) edges.push_back({0, leaf, w, p});
  } else if (spec.name == "complete") {
    nargs(1, 2);
    const auto nn = detail::spec_int(spec, 0, 0, true);
    const auto wmax = detail::spec_int(spec, 1, kDefaultWmax, false);
    check_wmax(wmax);
    if (nn < 0 || nn > 5000) throw Error(ErrorCode::BadSpec, spec.str() + ": bad vertex count");
    n = static_cast<std::int32_t>(nn);
    for (std::int32_t u = 0; u < n; ++u)
      for (std::int32_t v = u + 1; v < n; ++v) edges.push_back({u, v, rng.uniform(1, wmax), p});
  } else if (spec.name == "bipartite") {
    nargs(3, 4);
    const auto a = detail::spec_int(spec, 0, 0, true);
    const auto b = detail::spec_int(spec, 1, 0, true);
    const double density = detail::spec_double(spec, 2);
    const auto wmax = detail::spec_int(spec, 3, kDefaultWmax, false);
    check_wmax(wmax);
    if (a < 0 || b < 0 || a + b > 100'000 || !(density >= 0.0 && density <= 1.0))
      throw Error(ErrorCode::BadSpec, spec.str() + ": bad bipartite parameters");
    n = static_cast<std::int32_t>(a + b);
    for (std::int32_t u = 0; u < a; ++u)
      for (std::int32_t v = 0; v < b; ++v) {
        const double coin = rng.unit();
        const Weight w = rng.uniform(1, wmax);
        if (coin < density) edges.push_back({u, static_cast<Vertex>(a + v), w, p});
      }
  } else if (spec.name == "gnm") {
    nargs(2, 3);
    const auto nn = detail::spec_int(spec, 0, 0, true);
    const auto mm = detail::spec_int(spec, 1, 0, true);
    const auto wmax = detail::spec_int(spec, 2, kDefaultWmax, false);
    check_wmax(wmax);
    if (nn < 0 || nn > 100'000 || mm < 0) throw Error(ErrorCode::BadSpec, spec.str() + ": bad parameters");
    const std::int64_t pairs = nn * (nn - 1) / 2;
    if (mm > pairs)
      throw Error(ErrorCode::BadSpec, spec.str() + ": m=" + std::to_string(mm) + " exceeds " + std::to_string(pairs) + " vertex pairs");
    n = static_cast<std::int32_t>(nn);
    // Floyd's sampling of m distinct pair indices, then sorted for stable ids.
    std::vector<std::int64_t> chosen;
    std::map<std::int64_t, bool> taken;
    for (std::int64_t j = pairs - mm; j < pairs; ++j) {
      std::int64_t t = rng.uniform(0, j);
      if (taken.count(t)) t = j;
      taken[t] = true;
      chosen.push_back(t);
    }
    std::sort(chosen.begin(), chosen.end());
    for (std::int64_t idx : chosen) {
      // Unrank idx into the pair (u, v), u < v, in row-major order.
      std::int64_t u = 0, rem = idx;
      while (rem >= nn - 1 - u) {
        rem -= nn - 1 - u;
        ++u;
      }
      const auto v = u + 1 + rem;
      edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), rng.uniform(1, wmax), p});
    }
  } else {
    throw Error(ErrorCode::BadSpec, "unknown generator '" + spec.name + "'");
  }
  return build_graph(n, edges);
}

inline WeightedGraph gen_graph(const std::string& spec, std::uint64_t seed, double p = 1.0) {
  return gen_graph(parse_generator(spec), seed, p);
}

// ---------------------------------------------------------------------------
// Configuration

enum class Mode { Adaptive, NonAdaptive, Both };

inline Mode parse_mode(const std::string& s) {
  if (s == "adaptive") return Mode::Adaptive;
  if (s == "nonadaptive") return Mode::NonAdaptive;
  if (s == "both") return Mode::Both;
  throw Error(ErrorCode::BadConfig, "mode must be adaptive|nonadaptive|both, got '" + s + "'");
}

inline constexpr std::size_t kDefaultTrials = 10'000;

struct ExperimentConfig {
  std::optional<std::string> graph_path;
  std::optional<std::string> generator;
  /// Global edge probability; nullopt means "per-edge" (file values).
  std::optional<double> p;
  Rational eps{1, 2};
  /// Explicit round count; nullopt means "auto" (default_rounds).
  std::optional<std::int64_t> rounds;
  std::int64_t rounds_cap = 1'000'000;
  std::size_t trials = kDefaultTrials;
  std::uint64_t seed = 1;
  Mode mode = Mode::Both;
  bool certificates = true;
  std::string out;
  /// Record wall-clock seconds in the CSV; off keeps output byte-reproducible.
  bool timing = false;

  void validate() const {
    if (graph_path.has_value() == generator.has_value())
      throw Error(ErrorCode::BadConfig, "exactly one of graph file or generator must be given");
    if (trials < 1) throw Error(ErrorCode::BadConfig, "trials must be >= 1");
    checked_epsilon(eps);
    if (p && !(*p > 0.0 && *p <= 1.0)) throw Error(ErrorCode::BadConfig, "p must lie in (0,1]");
    if (generator && !p) throw Error(ErrorCode::BadConfig, "generated graphs need a global p");
    if (rounds && *rounds < 0) throw Error(ErrorCode::BadConfig, "rounds must be >= 0");
  }

  std::string graph_label() const { return generator ? parse_generator(*generator).str() : graph_path.value_or(""); }
};

/// Applies one `key=value` setting; keys mirror the CLI flags.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto to_u64 = [&](const std::string& v) {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
      x = std::stoull(v, &used);
    } catch (...) {
      used = 0;
    }
    if (used != v.size() || v.empty() || v[0] == '-') throw Error(ErrorCode::BadConfig, key + ": '" + v + "' is not a non-negative integer");
    return static_cast<std::uint64_t>(x);
  };
  if (key == "graph") {
    cfg.graph_path = value;
  } else if (key == "gen") {
    cfg.generator = value;
  } else if (key == "p") {
    if (value == "per-edge") {
      cfg.p.reset();
    } else {
      std::size_t used = 0;
      double p = 0;
      try {
        p = std::stod(value, &used);
      } catch (...) {
        used = 0;
      }
      if (used != value.size()) throw Error(ErrorCode::BadConfig, "p: '" + value + "' is not a number");
      cfg.p = p;
    }
  } else if (key == "eps") {
    try {
      cfg.eps = parse_rational(value);
    } catch (const Error& e) {
      throw Error(ErrorCode::BadConfig, std::string("eps: ") + e.what());
    }
  } else if (key == "rounds") {
    if (value == "auto")
      cfg.rounds.reset();
    else
      cfg.rounds = static_cast<std::int64_t>(to_u64(value));
  } else if (key == "rounds_cap") {
    cfg.rounds_cap = static_cast<std::int64_t>(to_u64(value));
  } else if (key == "trials") {
    cfg.trials = static_cast<std::size_t>(to_u64(value));
  } else if (key == "seed") {
    cfg.seed = to_u64(value);
  } else if (key == "mode") {
    cfg.mode = parse_mode(value);
  } else if (key == "certs") {
    if (value != "on" && value != "off") throw Error(ErrorCode::BadConfig, "certs must be on|off");
    cfg.certificates = value == "on";
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "timing") {
    if (value != "on" && value != "off") throw Error(ErrorCode::BadConfig, "timing must be on|off");
    cfg.timing = value == "on";
  } else {
    throw Error(ErrorCode::BadConfig, "unknown key '" + key + "'");
  }
}

/// Flat `key=value` file; blank lines and `#` comments ignored.
inline void load_config(ExperimentConfig& cfg, std::istream& in, const std::string& source = "<config>") {
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string{};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::BadConfig, source + ":" + std::to_string(lineno) + ": expected key=value");
    apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  load_config(cfg, in, path);
}

inline WeightedGraph load_graph(const ExperimentConfig& cfg) {
  if (cfg.generator) return gen_graph(*cfg.generator, derive_seed(cfg.seed, "graph", 0), cfg.p.value_or(1.0));
  WeightedGraph g = read_edge_list(*cfg.graph_path, cfg.p);
  if (!cfg.p) return g;
  // A global p overrides whatever the file says.
  std::vector<EdgeSpec> specs;
  for (const Edge& e : g.edges()) specs.push_back({e.u, e.v, e.w, *cfg.p});
  return build_graph(g.n(), specs);
}

// ---------------------------------------------------------------------------
// Experiments

struct ModeResult {
  std::string mode;
  std::int64_t rounds = 0;
  Estimate achieved;
  double ratio = 0.0;
  double ratio_se = 0.0;
  std::int32_t max_pv_queries = 0;
  std::size_t cert_checks = 0;
  std::size_t cert_failures = 0;
  /// (trial, round) of the first failing certificate; round 0 = per-trial check.
  std::optional<std::pair<std::size_t, std::int64_t>> first_failure;
  std::vector<Weight> samples;
};

struct ExperimentResult {
  std::string graph;
  std::int32_t n = 0;
  std::int32_t m = 0;
  std::string p_label;
  Rational eps;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool opt_exact = false;
  Estimate opt;
  std::vector<ModeResult> modes;
  double secs = 0.0;
  /// JSON-lines trace of every adaptive round, in trial order (when certificates are on).
  std::vector<std::string> trace;

  std::size_t cert_failures() const {
    std::size_t s = 0;
    for (const auto& m : modes) s += m.cert_failures;
    return s;
  }
};

namespace detail {

inline void fill_ratio(ModeResult& r, const Estimate& opt) {
  if (opt.mean <= 0.0) {
    r.ratio = r.achieved.mean <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    r.ratio_se = 0.0;
    return;
  }
  r.ratio = r.achieved.mean / opt.mean;
  const double a = r.achieved.standard_error / opt.mean;
  const double b = r.achieved.mean * opt.standard_error / (opt.mean * opt.mean);
  r.ratio_se = std::hypot(a, b);
}

inline std::string p_label(const ExperimentConfig& cfg) {
  if (!cfg.p) return "per-edge";
  return format_probability(*cfg.p);
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const WeightedGraph& g, bool keep_trace = false) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.graph = cfg.graph_label();
  res.n = g.n();
  res.m = g.m();
  res.p_label = detail::p_label(cfg);
  res.eps = cfg.eps;
  res.trials = cfg.trials;
  res.seed = cfg.seed;

  if (static_cast<std::size_t>(g.m()) <= kExactEnumerationLimit) {
    res.opt_exact = true;
    res.opt = {omniscient_opt_exact(g), 0.0};
  } else {
    if (cfg.trials < 2) throw Error(ErrorCode::BadConfig, "Monte Carlo opt needs trials >= 2");
    res.opt = omniscient_opt_mc(g, cfg.trials, cfg.seed);
  }

  const double p_min = g.m() == 0 ? 1.0 : g.min_probability();
  const std::int64_t rounds = cfg.rounds ? *cfg.rounds : default_rounds(cfg.eps, p_min, cfg.rounds_cap);
  auto trial_seed = [&](std::size_t i) { return derive_seed(cfg.seed, "alg", i); };

  if (cfg.mode == Mode::Adaptive || cfg.mode == Mode::Both) {
    ModeResult mr;
    mr.mode = "adaptive";
    mr.rounds = rounds;
    mr.samples.assign(cfg.trials, 0);
    std::vector<std::int32_t> pv(cfg.trials, 0);
    std::vector<std::size_t> checks(cfg.trials, 0);
    std::vector<std::int64_t> fail_round(cfg.trials, -1);
    std::vector<std::size_t> fails(cfg.trials, 0);
    std::vector<std::string> lines(keep_trace && cfg.certificates ? cfg.trials : 0);
    parallel_for(cfg.trials, [&](std::size_t i) {
      const Realization real = realize(g, trial_seed(i));
      AdaptiveOptions opts;
      opts.certificates = cfg.certificates;
      const auto run = adaptive_run(g, real, rounds, cfg.eps, opts);
      mr.samples[i] = run.final_matching.weight;
      pv[i] = run.max_per_vertex_queries;
      for (const auto& rec : run.rounds) {
        if (!rec.certificates) continue;
        ++checks[i];
        if (!rec.certificates->all_ok()) {
          ++fails[i];
          if (fail_round[i] < 0) fail_round[i] = rec.r;
        }
        if (!lines.empty()) lines[i] += round_to_json(rec, i, cfg.eps).dump() + "\n";
      }
    });
    mr.achieved = summarize(mr.samples);
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      mr.max_pv_queries = std::max(mr.max_pv_queries, pv[i]);
      mr.cert_checks += checks[i];
      mr.cert_failures += fails[i];
      if (fail_round[i] >= 0 && !mr.first_failure) mr.first_failure = std::make_pair(i, fail_round[i]);
    }
    for (auto& l : lines) res.trace.push_back(std::move(l));
    detail::fill_ratio(mr, res.opt);
    res.modes.push_back(std::move(mr));
  }

  if (cfg.mode == Mode::NonAdaptive || cfg.mode == Mode::Both) {
    ModeResult mr;
    mr.mode = "nonadaptive";
    mr.rounds = rounds;
    const NonAdaptiveState st = nonadaptive_select(g, rounds);
    const EdgeSet rest = st.n_rest();
    mr.max_pv_queries = st.max_degree(g);
    mr.samples.assign(cfg.trials, 0);
    std::vector<char> ok(cfg.trials, 1);
    parallel_for(cfg.trials, [&](std::size_t i) {
      const Realization real = realize(g, trial_seed(i));
      mr.samples[i] = max_weight_matching(g, real.realized & st.h).weight;
      if (cfg.certificates) {
        // Superadditivity on this realization: H∩𝔈 and N∩𝔈 cover 𝔈.
        const Weight rest_w = max_weight_matching(g, real.realized & rest).weight;
        const Weight all_w = max_weight_matching(g, real.realized).weight;
        ok[i] = mr.samples[i] + rest_w >= all_w;
      }
    });
    mr.achieved = summarize(mr.samples);
    if (cfg.certificates) {
      mr.cert_checks = cfg.trials;
      for (std::size_t i = 0; i < cfg.trials; ++i) {
        if (ok[i]) continue;
        ++mr.cert_failures;
        if (!mr.first_failure) mr.first_failure = std::make_pair(i, std::int64_t{0});
      }
    }
    detail::fill_ratio(mr, res.opt);
    res.modes.push_back(std::move(mr));
  }

  res.secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, bool keep_trace = false) {
  cfg.validate();
  return run_experiment(cfg, load_graph(cfg), keep_trace);
}

// ---------------------------------------------------------------------------
// CSV

inline const char* kCsvHeader =
    "graph,mode,p,eps,rounds,trials,seed,opt,opt_se,achieved,achieved_se,ratio,max_pv_queries,cert_failures,secs";

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_rows(const ExperimentResult& r, bool timing) {
  std::vector<std::string> rows;
  for (const auto& m : r.modes) {
    std::string row = csv_quote(r.graph) + "," + m.mode + "," + r.p_label + "," + r.eps.str() + "," +
                      std::to_string(m.rounds) + "," + std::to_string(r.trials) + "," + std::to_string(r.seed) + "," +
                      format_number(r.opt.mean) + "," + format_number(r.opt.standard_error) + "," +
                      format_number(m.achieved.mean) + "," + format_number(m.achieved.standard_error) + "," +
                      format_number(m.ratio) + "," + std::to_string(m.max_pv_queries) + "," +
                      std::to_string(m.cert_failures) + "," + (timing ? format_number(r.secs) : std::string("0"));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_csv(std::ostream& out, const std::vector<ExperimentResult>& results, bool timing) {
  out << kCsvHeader << "\n";
  for (const auto& r : results)
    for (const auto& row : csv_rows(r, timing)) out << row << "\n";
}

/// Path of the trace file written next to a CSV output.
inline std::string trace_path_for(const std::string& csv_path) {
  auto dot = csv_path.rfind('.');
  auto slash = csv_path.find_last_of('/');
  std::string stem = (dot != std::string::npos && (slash == std::string::npos || dot > slash)) ? csv_path.substr(0, dot) : csv_path;
  return stem + ".trace.jsonl";
}

/// The `run` command: experiment, CSV (and trace when certificates are on),
/// then CertificateFailure if any certificate failed.
inline ExperimentResult run_command(const ExperimentConfig& cfg) {
  cfg.validate();
  const bool want_trace = cfg.certificates && !cfg.out.empty();
  ExperimentResult res = run_experiment(cfg, want_trace);
  if (!cfg.out.empty()) {
    std::ofstream csv(cfg.out, std::ios::binary);
    if (!csv) throw Error(ErrorCode::Io, "cannot write '" + cfg.out + "'");
    write_csv(csv, {res}, cfg.timing);
    if (want_trace) {
      const std::string tp = trace_path_for(cfg.out);
      std::ofstream tr(tp, std::ios::binary);
      if (!tr) throw Error(ErrorCode::Io, "cannot write '" + tp + "'");
      for (const auto& l : res.trace) tr << l;
    }
  }
  for (const auto& m : res.modes) {
    if (m.cert_failures > 0)
      throw Error(ErrorCode::CertificateFailure, m.mode + ": " + std::to_string(m.cert_failures) +
                                                     " failing certificate(s), first at trial " +
                                                     std::to_string(m.first_failure->first) + " round " +
                                                     std::to_string(m.first_failure->second));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sweeps

/// One experiment per value of `axis` (p, eps, rounds or n). Point i runs
/// with seed derive_seed(base seed, "sweep", i).
inline std::vector<ExperimentResult> sweep(const ExperimentConfig& base, const std::string& axis,
                                           const std::vector<std::string>& values) {
  if (axis != "p" && axis != "eps" && axis != "rounds" && axis != "n")
    throw Error(ErrorCode::BadAxis, "axis must be one of p, eps, rounds, n; got '" + axis + "'");
  std::vector<ExperimentResult> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig cfg = base;
    cfg.seed = derive_seed(base.seed, "sweep", i);
    if (axis == "n") {
      if (!cfg.generator) throw Error(ErrorCode::BadAxis, "axis n needs a generator");
      auto spec = parse_generator(*cfg.generator);
      if (spec.args.empty()) throw Error(ErrorCode::BadSpec, spec.str() + ": no size argument");
      spec.args[0] = values[i];
      cfg.generator = spec.str();
    } else {
      apply_setting(cfg, axis, values[i]);
    }
    out.push_back(run_experiment(cfg));
  }
  return out;
}

}  // namespace stochmatch
