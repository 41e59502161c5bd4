#pragma once

#include <string>
#include <vector>

#include "misac/channel.hpp"
#include "misac/config.hpp"
#include "misac/design.hpp"
#include "misac/scenario.hpp"
#include "misac/sdr_ao.hpp"

namespace misac {

enum class Scheme { kProposed, kBaseline1, kBaseline2 };

std::string to_string(Scheme s);
/// Accepts "proposed", "baseline1", "baseline2".
Scheme parse_scheme(const std::string& s);

/// BS closest to the desired target, ties towards the lowest index.
int nearest_bs_to_target(const Scenario& scenario);
/// Serving BS of every user: the nearest one.
std::vector<int> associate_users(const Scenario& scenario);

/// Stacked user channel seen through the listed transmitters, target bounces included.
VectorXc stacked_user_channel(const NetworkChannels& net, int k, const std::vector<int>& transmitters);

/// Coordinated monostatic scheme. Every BS transmits (block m is BS m) and
/// serves all users; BS `node` also listens for its own echo. The echo term
/// only contains the node's own block. Clutter of every block and crosstalk
/// from the other BSs go through the receive beam; the residual
/// self-interference si * |S_node x_node|^2 reaches the receive chain
/// directly as a front-end term.
DesignInstance make_baseline1_instance(const NetworkChannels& net, const Scenario& scenario,
                                       const SystemConfig& config, int node);

/// Independent monostatic operation of BS m with the users in `users`. A BS
/// without users still designs one sensing beam. Inter-cell signals are not
/// modelled.
DesignInstance make_baseline2_instance(const NetworkChannels& net, const Scenario& scenario,
                                       const SystemConfig& config, int m,
                                       const std::vector<int>& users);

/// config.monostatic_node, or the BS nearest the target when it is negative.
int baseline1_node(const Scenario& scenario, const SystemConfig& config);

BeamformingSolution baseline1_solve(const NetworkChannels& net, const Scenario& scenario,
                                    const SystemConfig& config);

struct Baseline2Result {
  std::vector<int> association;
  std::vector<BeamformingSolution> per_bs;
  bool feasible = false;  // any per-BS design usable
};

Baseline2Result baseline2_solve(const NetworkChannels& net, const Scenario& scenario,
                                const SystemConfig& config);

/// Verified feasibility (first_round_check) of the first transmit block of
/// each per-BS problem, stopping at the first feasible one.
bool baseline2_feasible(const NetworkChannels& net, const Scenario& scenario,
                        const SystemConfig& config);

}  // namespace misac
