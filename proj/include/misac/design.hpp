#pragma once

#include <vector>

#include "misac/channel.hpp"
#include "misac/config.hpp"
#include "misac/scenario.hpp"
#include "misac/types.hpp"

namespace misac {

/// SINR constraint of one beam: |g^H w_k|^2 / (sum_{i!=k} |g^H w_i|^2 + noise) >= sinr_req.
struct UserLink {
  VectorXc g;
  double sinr_req = 0.0;
  double noise = 0.0;
};

/// weight * Tr(V B Z B^H)
struct ArrayTerm {
  MatrixXc B;
  double weight = 1.0;
};

/// weight * Tr(V) * Tr(L Z L^H): power that reaches the receive chain
/// regardless of the receive beam.
struct FrontEndTerm {
  MatrixXc L;
  double weight = 1.0;
};

/// One beamforming design problem, independent of which scheme produced it.
///
/// Transmit beams live in C^{N * num_blocks} (one block per transmitting BS);
/// the receive beam lives in C^N. Z is the sum of the transmit covariances.
struct DesignInstance {
  int antennas = 0;
  int num_blocks = 0;
  /// Beams to design; beam k serves users[k] when k < users.size(), the
  /// remaining beams only sense.
  int num_beams = 0;
  std::vector<UserLink> users;
  std::vector<double> power_budget;  // per block, W
  std::vector<double> tx_center;     // per block, rad
  double rx_center = 0.0;

  MatrixXc echo;                          // N x stacked: P_S = Tr(V E Z E^H)
  std::vector<ArrayTerm> interference;    // I_S terms through the receive beam
  std::vector<FrontEndTerm> front_end;    // I_S terms bypassing it
  double echo_req = 0.0;
  double interference_tol = 0.0;

  double beamwidth = 0.0;
  int grid_size = 0;
  double spacing = 0.5;

  int stacked_dim() const { return antennas * num_blocks; }
  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
};

/// Multistatic design for the transmitter/receiver split of `ch`.
DesignInstance make_multistatic_instance(const ChannelSet& ch, const Scenario& scenario,
                                         const SystemConfig& config);

/// Coefficient matrix C_Z with I_S = Tr(C_Z Z) for a fixed receive covariance.
MatrixXc interference_in_z(const DesignInstance& d, const MatrixXc& V);
/// Coefficient matrix C_V with I_S = Tr(C_V V) for a fixed transmit covariance.
MatrixXc interference_in_v(const DesignInstance& d, const MatrixXc& Z);

}  // namespace misac
