#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "misac/baselines.hpp"
#include "misac/channel.hpp"
#include "misac/config.hpp"
#include "misac/design.hpp"
#include "misac/scenario.hpp"
#include "misac/sdr_ao.hpp"
#include "misac/selection.hpp"

namespace misac {

/// Everything drawn for one seed. Every scheme evaluated on a trial consumes
/// this same object.
struct Trial {
  std::uint64_t seed = 0;
  Scenario scenario;
  SelectionResult selection;
  NetworkChannels net;
  ChannelSet channels;  // multistatic split chosen by the selection
};

Trial make_trial(const SystemConfig& config, std::uint64_t seed);

DesignInstance proposed_instance(const Trial& trial, const SystemConfig& config);

/// Infeasibility test used for counting: first_round_check on the scheme's
/// design instance(s). Baseline 2 is feasible as soon as one BS is.
/// kUnverified: the solver returned a point that fails the feasibility
/// tolerance, so neither verdict is certified.
enum class TrialOutcome { kFeasible, kInfeasible, kUnverified, kTimeout, kError };

std::string to_string(TrialOutcome o);

struct FeasibilityCheck {
  TrialOutcome outcome = TrialOutcome::kError;
  std::string detail;  // solver status or exception text
};

FeasibilityCheck check_scheme_feasibility(Scheme scheme, const Trial& trial, const SystemConfig& config);

struct SweepSpec {
  std::vector<double> i_tol_dbm;  // strictly monotonic
  int trials = 100;
  std::vector<Scheme> schemes = {Scheme::kProposed, Scheme::kBaseline1, Scheme::kBaseline2};
  std::uint64_t base_seed = 1;
  int workers = 1;
  /// Also run the full alternating optimization on feasible proposed trials.
  bool solve_feasible = false;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// -110 to -80 dBm in 2 dB steps, 100 trials, all schemes.
SweepSpec default_sweep();

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::kProposed;
  int point = 0;
  double i_tol_dbm = 0.0;
  bool feasible = false;
  TrialOutcome outcome = TrialOutcome::kError;
  std::string detail;
  // Filled only when the full design was run.
  bool solved = false;
  double objective = 0.0;
  std::vector<double> rank_ratios;
  int ao_rounds = 0;
  double runtime_s = 0.0;
};

nlohmann::json to_json(const TrialRecord& r);

struct SweepRow {
  double i_tol_dbm = 0.0;
  Scheme scheme = Scheme::kProposed;
  int trials = 0;
  int infeasible = 0;
  double rate() const { return trials > 0 ? static_cast<double>(infeasible) / trials : 0.0; }
};

struct SweepResult {
  std::vector<TrialRecord> records;  // ordered by (trial, point, scheme)
  std::vector<SweepRow> summary;     // ordered by (point, scheme)
};

/// Trial t uses seed base_seed + t for every point and scheme. Anything that
/// is not a verified feasible point counts as infeasible.
SweepResult run_infeasibility_sweep(const SweepSpec& spec, const SystemConfig& config);

/// Header i_tol_dbm,scheme,trials,infeasible,rate.
void write_infeasibility_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// One JSON document per line.
void write_records_jsonl(std::ostream& out, const std::vector<TrialRecord>& records);

/// Normalized patterns of one design, sampled at offsets from each pattern's
/// own center so that all main lobes sit at 0 degrees.
struct BeampatternTable {
  std::vector<double> angle_deg;
  std::vector<double> ideal;
  std::vector<std::vector<double>> tx;  // per transmitter
  std::vector<double> rx;
};

/// Pattern magnitudes |a^H Z D_m a| and a^H V a at center + offset for the
/// grid offsets, each column divided by its maximum (all-zero columns stay zero).
BeampatternTable beampattern_table(const DesignInstance& d, const std::vector<VectorXc>& beams,
                                   const VectorXc& v);

struct BeampatternExperiment {
  bool feasible = false;
  BeamformingSolution solution;
  BeampatternTable table;
};

/// Proposed design for one seed. The table is empty for infeasible instances.
BeampatternExperiment run_beampattern_experiment(const SystemConfig& config, std::uint64_t seed);

/// Header angle_deg,ideal,tx_1..tx_{M-1},rx.
void write_beampattern_csv(std::ostream& out, const BeampatternTable& t);

}  // namespace misac
