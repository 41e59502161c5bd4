#include "misac/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "misac/beampattern.hpp"
#include "misac/units.hpp"

namespace misac {

Trial make_trial(const SystemConfig& config, std::uint64_t seed) {
  Trial t;
  t.seed = seed;
  t.scenario = generate_scenario(config, seed);
  t.selection = select_receiver(t.scenario, config);
  std::mt19937_64 rng = channel_rng(seed);
  t.net = draw_network_channels(t.scenario, config, rng);
  t.channels = stack_channels(t.net, t.selection.receiver_index, t.selection.transmitter_indices);
  return t;
}

DesignInstance proposed_instance(const Trial& trial, const SystemConfig& config) {
  return make_multistatic_instance(trial.channels, trial.scenario, config);
}

std::string to_string(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::kFeasible: return "feasible";
    case TrialOutcome::kInfeasible: return "infeasible";
    case TrialOutcome::kUnverified: return "unverified";
    case TrialOutcome::kTimeout: return "timeout";
    case TrialOutcome::kError: return "error";
  }
  return "?";
}

namespace {

FeasibilityCheck classify(const FirstRound& f, bool out_of_time) {
  FeasibilityCheck c;
  c.detail = f.screened ? "screened" : conic::to_string(f.status);
  if (conic::has_solution(f.status)) {
    std::ostringstream v;
    v << std::setprecision(3) << f.violation;
    c.detail += " violation " + v.str();
    c.outcome = f.verified ? TrialOutcome::kFeasible : TrialOutcome::kUnverified;
  } else if (f.status == conic::SolveStatus::kPrimalInfeasible) {
    c.outcome = TrialOutcome::kInfeasible;
  } else if (out_of_time) {
    c.outcome = TrialOutcome::kTimeout;
  } else {
    c.outcome = TrialOutcome::kError;
  }
  return c;
}

}  // namespace

FeasibilityCheck check_scheme_feasibility(Scheme scheme, const Trial& trial, const SystemConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  AoOptions opt = ao_options(config);
  const auto remaining = [&] {
    return config.trial_timeout_s -
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const auto limited = [&](const DesignInstance& d) {
    if (config.trial_timeout_s > 0.0) opt.time_limit_s = std::max(remaining(), 1e-3);
    const auto f = first_round_check(d, opt);
    return classify(f, config.trial_timeout_s > 0.0 && remaining() <= 0.0);
  };
  try {
    switch (scheme) {
      case Scheme::kProposed:
        return limited(proposed_instance(trial, config));
      case Scheme::kBaseline1:
        return limited(make_baseline1_instance(trial.net, trial.scenario, config,
                                               baseline1_node(trial.scenario, config)));
      case Scheme::kBaseline2: {
        const auto association = associate_users(trial.scenario);
        FeasibilityCheck worst{TrialOutcome::kInfeasible, ""};
        for (int m = 0; m < trial.scenario.num_bs(); ++m) {
          std::vector<int> users;
          for (std::size_t k = 0; k < association.size(); ++k) {
            if (association[k] == m) users.push_back(static_cast<int>(k));
          }
          const auto c = limited(make_baseline2_instance(trial.net, trial.scenario, config, m, users));
          if (c.outcome == TrialOutcome::kFeasible) return {c.outcome, "bs " + std::to_string(m) + ": " + c.detail};
          if (!worst.detail.empty()) worst.detail += "; ";
          worst.detail += c.detail;
          if (c.outcome != TrialOutcome::kInfeasible) worst.outcome = c.outcome;
        }
        return worst;
      }
    }
  } catch (const std::exception& e) {
    return {TrialOutcome::kError, e.what()};
  }
  return {TrialOutcome::kError, "unknown scheme"};
}

void SweepSpec::validate() const {
  if (i_tol_dbm.empty()) throw std::invalid_argument("sweep: no sweep values");
  if (trials < 1) throw std::invalid_argument("sweep: trials >= 1");
  if (workers < 1) throw std::invalid_argument("sweep: workers >= 1");
  if (schemes.empty()) throw std::invalid_argument("sweep: no schemes");
  if (i_tol_dbm.size() > 1) {
    const bool up = i_tol_dbm[1] > i_tol_dbm[0];
    for (std::size_t i = 1; i < i_tol_dbm.size(); ++i) {
      if (up ? !(i_tol_dbm[i] > i_tol_dbm[i - 1]) : !(i_tol_dbm[i] < i_tol_dbm[i - 1])) {
        throw std::invalid_argument("sweep: values must be strictly monotonic");
      }
    }
  }
}

SweepSpec default_sweep() {
  SweepSpec s;
  for (int v = -110; v <= -80; v += 2) s.i_tol_dbm.push_back(v);
  return s;
}

nlohmann::json to_json(const TrialRecord& r) {
  nlohmann::json j{
      {"trial", r.trial},
      {"seed", r.seed},
      {"scheme", to_string(r.scheme)},
      {"i_tol_dbm", r.i_tol_dbm},
      {"feasible", r.feasible},
      {"outcome", to_string(r.outcome)},
      {"detail", r.detail},
      {"runtime_s", r.runtime_s},
  };
  if (r.solved) {
    j["objective"] = r.objective;
    j["rank_ratios"] = r.rank_ratios;
    j["ao_rounds"] = r.ao_rounds;
  }
  return j;
}

namespace {

std::vector<TrialRecord> run_trial(const SweepSpec& spec, const SystemConfig& config, int t) {
  std::vector<TrialRecord> out;
  const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(t);
  Trial trial;
  std::string setup_error;
  try {
    trial = make_trial(config, seed);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  for (std::size_t p = 0; p < spec.i_tol_dbm.size(); ++p) {
    SystemConfig cfg = config;
    cfg.interference_tol = dbm_to_watt(spec.i_tol_dbm[p]);
    for (Scheme s : spec.schemes) {
      TrialRecord r;
      r.trial = t;
      r.seed = seed;
      r.scheme = s;
      r.point = static_cast<int>(p);
      r.i_tol_dbm = spec.i_tol_dbm[p];
      const auto start = std::chrono::steady_clock::now();
      if (!setup_error.empty()) {
        r.outcome = TrialOutcome::kError;
        r.detail = setup_error;
      } else {
        const auto c = check_scheme_feasibility(s, trial, cfg);
        r.outcome = c.outcome;
        r.detail = c.detail;
        r.feasible = c.outcome == TrialOutcome::kFeasible;
        if (r.feasible && spec.solve_feasible && s == Scheme::kProposed) {
          try {
            const auto sol = alternating_optimize(proposed_instance(trial, cfg), ao_options(cfg));
            r.solved = sol.usable();
            r.objective = sol.objective;
            r.rank_ratios = sol.rank_ratio_w;
            r.rank_ratios.push_back(sol.rank_ratio_v);
            r.ao_rounds = sol.rounds;
          } catch (const std::exception& e) {
            r.detail += std::string("; design failed: ") + e.what();
          }
        }
      }
      r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace

SweepResult run_infeasibility_sweep(const SweepSpec& spec, const SystemConfig& config) {
  spec.validate();
  config.validate();
  std::vector<std::vector<TrialRecord>> per_trial(spec.trials);
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int t = next++; t < spec.trials; t = next++) per_trial[t] = run_trial(spec, config, t);
  };
  const int n = std::min(spec.workers, spec.trials);
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  SweepResult res;
  for (auto& v : per_trial) {
    for (auto& r : v) res.records.push_back(std::move(r));
  }
  const int S = static_cast<int>(spec.schemes.size());
  for (std::size_t p = 0; p < spec.i_tol_dbm.size(); ++p) {
    for (int s = 0; s < S; ++s) res.summary.push_back({spec.i_tol_dbm[p], spec.schemes[s], 0, 0});
  }
  for (const auto& r : res.records) {
    int s = 0;
    while (spec.schemes[s] != r.scheme) ++s;
    SweepRow& row = res.summary[r.point * S + s];
    ++row.trials;
    if (!r.feasible) ++row.infeasible;
  }
  return res;
}

void write_infeasibility_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "i_tol_dbm,scheme,trials,infeasible,rate\n";
  for (const auto& r : rows) {
    out << std::setprecision(10) << r.i_tol_dbm << ',' << to_string(r.scheme) << ',' << r.trials << ','
        << r.infeasible << ',' << std::setprecision(10) << r.rate() << '\n';
  }
}

void write_records_jsonl(std::ostream& out, const std::vector<TrialRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

BeampatternTable beampattern_table(const DesignInstance& d, const std::vector<VectorXc>& beams,
                                   const VectorXc& v) {
  const AngularGrid grid(d.grid_size, d.antennas, d.spacing);
  const MatrixXc Z = beam_covariance(beams, d.stacked_dim());
  const MatrixXc V = v * v.adjoint();
  BeampatternTable t;
  t.tx.assign(d.num_blocks, {});
  for (int i = 0; i < grid.size(); ++i) {
    const double off = grid.direction(i);
    t.angle_deg.push_back(rad_to_deg(off));
    t.ideal.push_back(std::abs(off) <= d.beamwidth / 2.0 + 1e-12 ? 1.0 : 0.0);
    for (int m = 0; m < d.num_blocks; ++m) {
      t.tx[m].push_back(std::abs(transmit_pattern_at(Z, m, d.tx_center[m] + off, d.antennas, d.spacing)));
    }
    t.rx.push_back(std::max(0.0, receive_pattern_at(V, d.rx_center + off, d.spacing)));
  }
  const auto normalize = [](std::vector<double>& c) {
    const double mx = *std::max_element(c.begin(), c.end());
    if (mx > 0.0) {
      for (double& x : c) x /= mx;
    }
  };
  for (auto& c : t.tx) normalize(c);
  normalize(t.rx);
  return t;
}

BeampatternExperiment run_beampattern_experiment(const SystemConfig& config, std::uint64_t seed) {
  BeampatternExperiment e;
  const Trial trial = make_trial(config, seed);
  const DesignInstance d = proposed_instance(trial, config);
  e.solution = alternating_optimize(d, ao_options(config));
  e.feasible = e.solution.usable();
  if (e.feasible) e.table = beampattern_table(d, e.solution.w, e.solution.v);
  return e;
}

void write_beampattern_csv(std::ostream& out, const BeampatternTable& t) {
  out << "angle_deg,ideal";
  for (std::size_t m = 0; m < t.tx.size(); ++m) out << ",tx_" << m + 1;
  out << ",rx\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < t.angle_deg.size(); ++i) {
    out << t.angle_deg[i] << ',' << t.ideal[i];
    for (const auto& c : t.tx) out << ',' << c[i];
    out << ',' << t.rx[i] << '\n';
  }
}

}  // namespace misac
