#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace misac {

/// How the interference seen by the sensing receiver is assembled.
enum class InterferenceModel {
  /// Clutter echoes (targets j >= 1) plus direct BS crosstalk.
  kClutterCrosstalk,
  /// Everything impinging on the receiver minus the desired echo.
  kTotalMinusDesired,
};

/// Conic solver settings used by the beamforming design. `method` is
/// "interior_point" or "splitting".
struct SolverTolerances {
  std::string method = "interior_point";
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  int max_iters = 100000;
};

/// All physical and algorithmic parameters. Powers are stored in watts;
/// dBm only appears at the configuration-file boundary.
struct SystemConfig {
  int num_bs = 3;                  // M
  int antennas_per_bs = 9;         // N
  int num_users = 3;               // K
  int num_clutter_targets = 2;     // J (the desired target is extra)
  double cell_radius = 100.0;      // m
  double mu = 1e-4;                // path-gain reference (c / 4 pi f_c)^2
  double antenna_spacing = 0.5;    // wavelengths
  double beamwidth = 0.17453292519943295;  // rad (10 degrees)
  double selection_weight = 0.5;   // rho
  int grid_size = 360;             // I
  double per_bs_power_budget = 19.952623149688797;    // 43 dBm
  double echo_power_req = 1e-12;                       // -90 dBm
  double interference_tol = 2.5118864315095823e-13;   // -96 dBm
  double sinr_req = 10.0;                              // 10 dB
  double user_noise = 3.1622776601683794e-14;          // -105 dBm
  double receiver_noise = 3.1622776601683794e-14;      // -105 dBm
  /// Radar cross-section per target, index 0 is the desired target. A single
  /// entry is broadcast to all J + 1 targets.
  std::vector<double> rcs = {1.0};
  double pathloss_exp_user = 3.0;
  double pathloss_exp_other = 2.0;
  double rician_factor = 5.0;      // linear
  double si_cancellation = 1e-10;  // -100 dB
  double ao_tolerance = 1e-3;
  int ao_max_iters = 20;
  std::uint64_t rng_seed = 1;

  InterferenceModel interference_model = InterferenceModel::kClutterCrosstalk;
  SolverTolerances solver;
  double feasibility_rel_tol = 1e-3;
  double trial_timeout_s = 120.0;
  /// Baseline 1 monostatic node: -1 picks the BS nearest to the desired target.
  int monostatic_node = -1;

  int num_targets() const { return num_clutter_targets + 1; }
  int num_transmitters() const { return num_bs - 1; }
  int stacked_dim() const { return antennas_per_bs * (num_bs - 1); }
  double target_rcs(int j) const;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

/// Parses a JSON object. Unknown keys are rejected. Power fields accept a
/// number (watts) or a string with a unit suffix ("43 dBm", "0.5 W");
/// ratio fields accept a number (linear) or a string in dB ("10 dB").
SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& cfg);
SystemConfig load_config(const std::filesystem::path& path);

/// Parses "<value> dBm", "<value> W" or a bare number of watts.
double parse_power(const nlohmann::json& v);
/// Parses "<value> dB" or a bare linear number.
double parse_ratio(const nlohmann::json& v);

std::string to_string(InterferenceModel m);

}  // namespace misac
