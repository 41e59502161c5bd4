#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "misac/channel.hpp"
#include "misac/config.hpp"
#include "misac/design.hpp"
#include "misac/types.hpp"

namespace misac {

/// |g^H w_k|^2 / (sum_{i != k} |g^H w_i|^2 + noise)
double sinr(int k, const VectorXc& g, const std::vector<VectorXc>& beams, double noise);
double sinr(int k, const ChannelSet& ch, const std::vector<VectorXc>& beams, double noise);

/// Tr(V E Z E^H). V and Z must be Hermitian PSD within tolerance.
double echo_power(const MatrixXc& V, const MatrixXc& Z, const MatrixXc& E);
double echo_power(const MatrixXc& V, const MatrixXc& Z, const ChannelSet& ch);

/// Interference reaching the sensing receiver for the given instance.
double interference_power(const MatrixXc& V, const MatrixXc& Z, const DesignInstance& d);
/// Tr(V A Z A^H) with A the clutter echoes plus crosstalk of `ch`.
double interference_power(const MatrixXc& V, const MatrixXc& Z, const ChannelSet& ch);

/// Sum of squared magnitudes of block m across all beams.
double per_bs_power(int m, const std::vector<VectorXc>& beams, int antennas);

/// sum_k w_k w_k^H
MatrixXc beam_covariance(const std::vector<VectorXc>& beams, int dim);

/// Throws std::invalid_argument unless X is Hermitian with eigenvalues above
/// -1e-8 relative to its largest magnitude.
void require_psd(const MatrixXc& X, const char* what);

/// Constraint values of one vector solution. Margins are (satisfied quantity -
/// threshold), so a non-negative margin means the constraint holds.
struct QosReport {
  std::vector<double> sinr;
  double echo_power = 0.0;
  double interference = 0.0;
  double receiver_noise = 0.0;  // reported only, not constrained
  std::vector<double> per_bs_power;
  double receive_norm = 0.0;    // ||v||^2

  std::vector<double> margin_power;  // C1, per block: budget - power
  double margin_norm = 0.0;          // C2: -| ||v||^2 - 1 |
  double margin_echo = 0.0;          // C3: P_S - requirement
  double margin_interference = 0.0;  // C4: tolerance - I_S
  std::vector<double> margin_sinr;   // C5, per user: SINR - requirement

  bool feasible = false;
  double rel_tol = 0.0;
};

/// Evaluates C1-C5 for beams w_k and receive beam v. A constraint is accepted
/// when its margin is at least -rel_tol times its threshold.
QosReport check_feasibility(const DesignInstance& d, const std::vector<VectorXc>& beams,
                            const VectorXc& v, double rel_tol, double receiver_noise = 0.0);

nlohmann::json to_json(const QosReport& r);

}  // namespace misac
