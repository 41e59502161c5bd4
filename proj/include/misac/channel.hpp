#pragma once

#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "misac/config.hpp"
#include "misac/scenario.hpp"
#include "misac/types.hpp"

namespace misac {

/// ULA response: entry n equals exp(j 2 pi spacing n sin(theta)).
VectorXc steering_vector(double theta, int n, double spacing);

/// Pure line-of-sight channel sqrt(rcs * mu / d^2) * a(theta). Used both for
/// BS-to-target and target-to-receiver links. Throws for d below the guard.
VectorXc los_target_channel(double rcs, double mu, double d, double theta, int n,
                            double spacing);

/// sqrt(pathloss) * (sqrt(k/(1+k)) * mean_hat + sqrt(1/(1+k)) * w), with
/// mean_hat the mean rescaled to unit RMS entry magnitude and w i.i.d. CN(0,1).
/// kappa may be +infinity (pure LoS). Always consumes one Gaussian draw per
/// entry so that the random stream does not depend on kappa.
MatrixXc rician_channel(const MatrixXc& mean, double kappa, double pathloss,
                        std::mt19937_64& rng);

/// Matrix of i.i.d. CN(0, 1) entries.
MatrixXc complex_gaussian(int rows, int cols, std::mt19937_64& rng);

/// Every per-link channel of the network, for all BSs in their original
/// labelling. Schemes that differ only in which BS receives share one draw.
struct NetworkChannels {
  int antennas = 0;
  std::vector<std::vector<VectorXc>> bs_user;    // [m][k]  g_{m,k}
  std::vector<std::vector<cdouble>> user_target; // [k][j]  l_{k,j}
  std::vector<std::vector<VectorXc>> bs_target;  // [m][j]  LoS, f_{m,j} = h_{m,j}
  /// [from][to]: N x N channel from BS `from` to the array of BS `to`.
  std::vector<std::vector<MatrixXc>> bs_bs;
  /// [m]: unit-power self-interference channel of BS m.
  std::vector<MatrixXc> self_interference;
};

/// Draws all links for a scenario. BS-BS links are reciprocal
/// (F_{b->a} = F_{a->b}^T).
NetworkChannels draw_network_channels(const Scenario& scenario, const SystemConfig& config,
                                      std::mt19937_64& rng);

/// Channels seen by one multistatic configuration: transmitters in
/// `transmitters` order (block m of every stacked vector belongs to
/// transmitters[m]) and one receiving BS.
struct ChannelSet {
  int antennas = 0;
  int receiver = -1;
  std::vector<int> transmitters;

  std::vector<std::vector<VectorXc>> g;   // [m][k]  direct BS-user
  std::vector<std::vector<cdouble>> l;    // [k][j]
  std::vector<std::vector<VectorXc>> f;   // [m][j]  BS-target
  std::vector<VectorXc> h;                // [j]     target-receiver
  std::vector<MatrixXc> F;                // [m]     BS-receiver

  std::vector<VectorXc> g_stacked;  // [k]  includes target bounces
  std::vector<VectorXc> f_stacked;  // [j]
  MatrixXc F_stacked;               // N x N(M-1)
  std::vector<MatrixXc> H;          // [j]  h_j f_j^H, N x N(M-1)

  int num_transmitters() const { return static_cast<int>(transmitters.size()); }
  int stacked_dim() const { return antennas * num_transmitters(); }
  int num_users() const { return static_cast<int>(g_stacked.size()); }
  int num_targets() const { return static_cast<int>(h.size()); }
};

/// Assembles the stacked forms for the given receiver/transmitter split.
ChannelSet stack_channels(const NetworkChannels& net, int receiver,
                          const std::vector<int>& transmitters);

/// Draws the network and stacks it for `receiver`; the transmitters are the
/// remaining BSs in original order.
ChannelSet build_channel_set(const Scenario& scenario, const SystemConfig& config, int receiver,
                             std::mt19937_64& rng);

/// Seed of the per-trial channel stream; distinct from the geometry stream.
std::mt19937_64 channel_rng(std::uint64_t seed);

// Signal models, used for validation only. `beams[k]` is the stacked w_k.

cdouble received_signal_user(int k, const ChannelSet& ch, const std::vector<VectorXc>& beams,
                             const VectorXc& symbols, cdouble noise);
cdouble received_signal_user_stacked(int k, const ChannelSet& ch,
                                     const std::vector<VectorXc>& beams,
                                     const VectorXc& symbols, cdouble noise);
VectorXc received_signal_receiver(const ChannelSet& ch, const std::vector<VectorXc>& beams,
                                  const VectorXc& symbols, const VectorXc& noise);
VectorXc received_signal_receiver_stacked(const ChannelSet& ch,
                                          const std::vector<VectorXc>& beams,
                                          const VectorXc& symbols, const VectorXc& noise);

/// Textual dump for cross-implementation comparison:
///   misac-channels 1
///   <name> <rows> <cols>
///   <re>,<im> <re>,<im> ...      (row-major, one line per row)
/// repeated for g_k, f_j, F_M and H_j.
void write_channel_dump(std::ostream& out, const ChannelSet& ch);
std::map<std::string, MatrixXc> read_channel_dump(std::istream& in);

}  // namespace misac
