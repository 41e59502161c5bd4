#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "misac/baselines.hpp"
#include "misac/config.hpp"
#include "misac/experiments.hpp"
#include "misac/sdr_ao.hpp"
#include "misac/selection.hpp"

namespace fs = std::filesystem;
using namespace misac;

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 1;
  bool seed_given = false;  // otherwise the config's rng_seed
  std::string out_dir = "out";
  int workers = 1;
};

SystemConfig load(const Globals& g) {
  SystemConfig c = g.config_path.empty() ? SystemConfig{} : load_config(g.config_path);
  c.validate();
  return c;
}

SystemConfig load(Globals& g) {
  const SystemConfig c = load(static_cast<const Globals&>(g));
  if (!g.seed_given) g.seed = c.rng_seed;
  return c;
}

fs::path output(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  std::ofstream f(p);
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("cannot write " + p.string());
}

int cmd_select(Globals& g) {
  const SystemConfig cfg = load(g);
  const Trial t = make_trial(cfg, g.seed);
  const auto& s = t.selection;
  const nlohmann::json j{{"seed", g.seed},
                         {"scores", s.scores},
                         {"log_scores", s.log_scores},
                         {"receiver", s.receiver_index},
                         {"transmitters", s.transmitter_indices}};
  write_json(output(g, "selection.json"), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_solve(Globals& g, const std::string& scheme_name, bool with_pattern) {
  const SystemConfig cfg = load(g);
  const Scheme scheme = parse_scheme(scheme_name);
  const Trial t = make_trial(cfg, g.seed);
  nlohmann::json j{{"seed", g.seed}, {"scheme", to_string(scheme)}, {"config", config_to_json(cfg)}};
  bool usable = false;
  switch (scheme) {
    case Scheme::kProposed: {
      const DesignInstance d = proposed_instance(t, cfg);
      const auto sol = alternating_optimize(d, ao_options(cfg));
      j["receiver"] = t.selection.receiver_index;
      j["solution"] = to_json(sol);
      usable = sol.usable();
      if (usable && with_pattern) {
        std::ofstream f(output(g, "beampattern.csv"));
        write_beampattern_csv(f, beampattern_table(d, sol.w, sol.v));
      }
      break;
    }
    case Scheme::kBaseline1: {
      const auto sol = baseline1_solve(t.net, t.scenario, cfg);
      j["monostatic_node"] = baseline1_node(t.scenario, cfg);
      j["solution"] = to_json(sol);
      usable = sol.usable();
      break;
    }
    case Scheme::kBaseline2: {
      const auto r = baseline2_solve(t.net, t.scenario, cfg);
      j["association"] = r.association;
      nlohmann::json per = nlohmann::json::array();
      for (const auto& s : r.per_bs) per.push_back(to_json(s));
      j["per_bs"] = per;
      usable = r.feasible;
      break;
    }
  }
  j["feasible"] = usable;
  write_json(output(g, "solution.json"), j);
  std::cout << to_string(scheme) << " seed " << g.seed << ": " << (usable ? "feasible" : "infeasible") << '\n';
  return usable ? 0 : 2;
}

int cmd_beampattern(Globals& g) {
  const SystemConfig cfg = load(g);
  const auto e = run_beampattern_experiment(cfg, g.seed);
  write_json(output(g, "beampattern.json"), {{"seed", g.seed}, {"solution", to_json(e.solution)}});
  if (!e.feasible) {
    std::cerr << "seed " << g.seed << ": instance infeasible (" << to_string(e.solution.status)
              << "), no beampattern.csv written\n";
    return 2;
  }
  std::ofstream f(output(g, "beampattern.csv"));
  write_beampattern_csv(f, e.table);
  std::cout << "wrote " << output(g, "beampattern.csv").string() << '\n';
  return 0;
}

int cmd_sweep(Globals& g, SweepSpec spec, const std::vector<std::string>& schemes,
              double from, double to, double step, const std::vector<double>& values) {
  const SystemConfig cfg = load(g);
  spec.base_seed = g.seed;
  spec.workers = g.workers;
  if (!schemes.empty()) {
    spec.schemes.clear();
    for (const auto& s : schemes) spec.schemes.push_back(parse_scheme(s));
  }
  if (!values.empty()) {
    spec.i_tol_dbm = values;
  } else {
    if (step <= 0.0) throw std::invalid_argument("--step must be positive");
    spec.i_tol_dbm.clear();
    for (int i = 0; from + i * step <= to + 1e-9; ++i) spec.i_tol_dbm.push_back(from + i * step);
  }
  const SweepResult r = run_infeasibility_sweep(spec, cfg);
  {
    std::ofstream f(output(g, "infeasibility.csv"));
    write_infeasibility_csv(f, r.summary);
  }
  {
    std::ofstream f(output(g, "trials.jsonl"));
    write_records_jsonl(f, r.records);
  }
  write_infeasibility_csv(std::cout, r.summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multistatic ISAC beamforming simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  auto* seed = app.add_option("--seed", g.seed, "Trial seed, or base seed of a sweep (default: config rng_seed)");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--workers", g.workers, "Parallel trial workers")->check(CLI::PositiveNumber);

  auto* select = app.add_subcommand("select", "Receiver selection for one seed");

  std::string scheme = "proposed";
  bool with_pattern = false;
  auto* solve = app.add_subcommand("solve", "Full design for one seed");
  solve->add_option("--scheme", scheme, "proposed, baseline1 or baseline2")
      ->check(CLI::IsMember({"proposed", "baseline1", "baseline2"}));
  solve->add_flag("--beampattern", with_pattern, "Also write beampattern.csv (proposed only)");

  auto* pattern = app.add_subcommand("beampattern", "Normalized beam patterns of the proposed design");

  SweepSpec spec = default_sweep();
  std::vector<std::string> schemes;
  double from = -110.0, to = -80.0, step = 2.0;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep-infeasibility", "Infeasibility rate versus I_S tolerance");
  sweep->add_option("--scheme", schemes, "Schemes to evaluate (repeatable, default all)")
      ->check(CLI::IsMember({"proposed", "baseline1", "baseline2"}));
  sweep->add_option("--trials", spec.trials, "Trials per sweep point")->check(CLI::PositiveNumber);
  sweep->add_option("--from", from, "First tolerance, dBm");
  sweep->add_option("--to", to, "Last tolerance, dBm");
  sweep->add_option("--step", step, "Tolerance step, dB");
  sweep->add_option("--values", values, "Explicit tolerance list, dBm (overrides the range)");
  sweep->add_flag("--solve-feasible", spec.solve_feasible, "Run the full design on feasible proposed trials");

  CLI11_PARSE(app, argc, argv);
  g.seed_given = seed->count() > 0;
  try {
    if (select->parsed()) return cmd_select(g);
    if (solve->parsed()) return cmd_solve(g, scheme, with_pattern);
    if (pattern->parsed()) return cmd_beampattern(g);
    if (sweep->parsed()) return cmd_sweep(g, spec, schemes, from, to, step, values);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
