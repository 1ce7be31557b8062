// Command-line front end: run, sweep, gen, verify, opt.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochmatch/stochmatch.hpp"

namespace sm = stochmatch;

namespace {

constexpr int kExitError = 1;
constexpr int kExitCertificate = 3;

// Flags shared by the experiment-style subcommands. Values stay strings so
// they go through the same parser as the config file.
struct CommonFlags {
  std::string config;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(CLI::App* app, bool experiment) {
    app->add_option("--config", config, "flat key=value config file (flags override it)");
    auto flag = [&](const std::string& key, const std::string& help) {
      options.emplace_back(key, app->add_option("--" + key, values[key], help));
    };
    flag("graph", "edge-list file");
    flag("gen", "generator spec, e.g. gnm(16,32,100)");
    flag("p", "global edge probability, or per-edge");
    flag("trials", "Monte Carlo trials");
    flag("seed", "base seed");
    if (experiment) {
      flag("eps", "epsilon as a/b or decimal");
      flag("rounds", "round count or auto");
      flag("mode", "adaptive|nonadaptive|both");
      flag("certs", "on|off");
      flag("out", "CSV output path (trace goes to <stem>.trace.jsonl)");
      app->add_flag("--timing", timing, "record wall-clock seconds in the CSV");
    }
  }

  sm::ExperimentConfig build() const {
    sm::ExperimentConfig cfg;
    if (!config.empty()) sm::load_config_file(cfg, config);
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      // A flag naming the other graph source replaces the file's choice.
      if (key == "graph") cfg.generator.reset();
      if (key == "gen") cfg.graph_path.reset();
      sm::apply_setting(cfg, key, values.at(key));
    }
    if (timing) cfg.timing = true;
    return cfg;
  }

  bool timing = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void print_summary(const sm::ExperimentResult& r) {
  std::cerr << r.graph << ": n=" << r.n << " m=" << r.m << " opt=" << sm::format_number(r.opt.mean)
            << (r.opt_exact ? " (exact)" : " (mc, se " + sm::format_number(r.opt.standard_error) + ")") << "\n";
  for (const auto& m : r.modes) {
    std::cerr << "  " << m.mode << " R=" << m.rounds << " achieved=" << sm::format_number(m.achieved.mean) << " ± "
              << sm::format_number(m.achieved.standard_error) << " ratio=" << sm::format_number(m.ratio)
              << " max_pv_queries=" << m.max_pv_queries << " certs=" << (m.cert_checks - m.cert_failures) << "/"
              << m.cert_checks << "\n";
  }
  std::cerr << "  wall " << sm::format_number(r.secs) << "s\n";
}

int cmd_run(const CommonFlags& flags) {
  const sm::ExperimentConfig cfg = flags.build();
  try {
    const auto res = sm::run_command(cfg);
    print_summary(res);
    if (cfg.out.empty()) sm::write_csv(std::cout, {res}, cfg.timing);
  } catch (const sm::Error& e) {
    if (e.code() != sm::ErrorCode::CertificateFailure) throw;
    std::cerr << e.what() << "\n";
    return kExitCertificate;
  }
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& axis, const std::string& values) {
  const sm::ExperimentConfig cfg = flags.build();
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = sm::sweep(cfg, axis, split_list(values));
  std::size_t failures = 0;
  for (const auto& r : results) {
    print_summary(r);
    failures += r.cert_failures();
  }
  if (cfg.out.empty()) {
    sm::write_csv(std::cout, results, cfg.timing);
  } else {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw sm::Error(sm::ErrorCode::Io, "cannot write '" + cfg.out + "'");
    sm::write_csv(out, results, cfg.timing);
  }
  std::cerr << "sweep wall " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << "s\n";
  if (failures > 0) {
    std::cerr << "CertificateFailure: " << failures << " failing certificate(s) in sweep\n";
    return kExitCertificate;
  }
  return 0;
}

int cmd_gen(const CommonFlags& flags, const std::string& out_path) {
  sm::ExperimentConfig cfg = flags.build();
  if (!cfg.generator) throw sm::Error(sm::ErrorCode::BadConfig, "gen needs --gen");
  const auto g = sm::gen_graph(*cfg.generator, sm::derive_seed(cfg.seed, "graph", 0), cfg.p.value_or(1.0));
  if (out_path.empty()) {
    sm::write_edge_list(std::cout, g);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw sm::Error(sm::ErrorCode::Io, "cannot write '" + out_path + "'");
    sm::write_edge_list(out, g);
  }
  return 0;
}

int cmd_verify(const std::string& trace, const CommonFlags& flags) {
  std::ifstream in(trace);
  if (!in) throw sm::Error(sm::ErrorCode::Io, "cannot open trace '" + trace + "'");
  std::optional<sm::WeightedGraph> g;
  sm::ExperimentConfig cfg = flags.build();
  if (cfg.graph_path || cfg.generator) {
    if (cfg.generator && !cfg.p) cfg.p = 1.0;
    g = sm::load_graph(cfg);
  }
  const auto v = sm::verify_trace(in, g ? &*g : nullptr);
  for (const auto& f : v.failures) std::cerr << f << "\n";
  std::cout << "records=" << v.records << " certified=" << v.certified_rounds
            << " lemma2_premise=" << v.lemma2_premise_rounds << " failures=" << v.failures.size() << "\n";
  return v.ok() ? 0 : kExitCertificate;
}

int cmd_opt(const CommonFlags& flags) {
  sm::ExperimentConfig cfg = flags.build();
  if (cfg.generator && !cfg.p) cfg.p = 0.5;
  if (cfg.graph_path.has_value() == cfg.generator.has_value())
    throw sm::Error(sm::ErrorCode::BadConfig, "exactly one of --graph or --gen must be given");
  const auto g = sm::load_graph(cfg);
  if (static_cast<std::size_t>(g.m()) <= sm::kExactEnumerationLimit) {
    std::cout << "opt=" << sm::format_number(sm::omniscient_opt_exact(g)) << " exact\n";
  } else {
    const auto e = sm::omniscient_opt_mc(g, cfg.trials, cfg.seed);
    std::cout << "opt=" << sm::format_number(e.mean) << " se=" << sm::format_number(e.standard_error) << " mc\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic weighted matching experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, gen_flags, verify_flags, opt_flags;
  auto* run = app.add_subcommand("run", "single experiment");
  run_flags.add(run, true);

  auto* sweep = app.add_subcommand("sweep", "one experiment per axis value");
  sweep_flags.add(sweep, true);
  std::string axis, values;
  sweep->add_option("--axis", axis, "p|eps|rounds|n")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();

  auto* gen = app.add_subcommand("gen", "emit a generated edge list");
  gen_flags.add(gen, false);
  std::string gen_out;
  gen->add_option("--out", gen_out, "edge-list output path (default stdout)");

  auto* verify = app.add_subcommand("verify", "re-check a certificate trace");
  verify_flags.add(verify, false);
  std::string trace;
  verify->add_option("trace", trace, "trace .jsonl file")->required();

  auto* opt = app.add_subcommand("opt", "omniscient optimum (exact when m <= 20)");
  opt_flags.add(opt, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags);
    if (*sweep) return cmd_sweep(sweep_flags, axis, values);
    if (*gen) return cmd_gen(gen_flags, gen_out);
    if (*verify) return cmd_verify(trace, verify_flags);
    if (*opt) return cmd_opt(opt_flags);
  } catch (const sm::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
