#include "misac/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace misac {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kProposed: return "proposed";
    case Scheme::kBaseline1: return "baseline1";
    case Scheme::kBaseline2: return "baseline2";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "proposed") return Scheme::kProposed;
  if (s == "baseline1") return Scheme::kBaseline1;
  if (s == "baseline2") return Scheme::kBaseline2;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

int nearest_bs_to_target(const Scenario& scenario) {
  if (scenario.num_bs() < 1) throw std::invalid_argument("nearest_bs_to_target: no BS");
  int best = 0;
  for (int m = 1; m < scenario.num_bs(); ++m) {
    if (scenario.bs_target_distance(m, 0) < scenario.bs_target_distance(best, 0)) best = m;
  }
  return best;
}

std::vector<int> associate_users(const Scenario& scenario) {
  std::vector<int> a;
  for (int k = 0; k < scenario.num_users(); ++k) {
    int best = 0;
    for (int m = 1; m < scenario.num_bs(); ++m) {
      if (scenario.bs_user_distance(m, k) < scenario.bs_user_distance(best, k)) best = m;
    }
    a.push_back(best);
  }
  return a;
}

VectorXc stacked_user_channel(const NetworkChannels& net, int k, const std::vector<int>& transmitters) {
  const int N = net.antennas;
  VectorXc g(N * static_cast<int>(transmitters.size()));
  for (std::size_t b = 0; b < transmitters.size(); ++b) {
    const int m = transmitters[b];
    VectorXc block = net.bs_user.at(m).at(k);
    for (std::size_t j = 0; j < net.bs_target[m].size(); ++j) {
      block += std::conj(net.user_target[k][j]) * net.bs_target[m][j];
    }
    g.segment(static_cast<int>(b) * N, N) = block;
  }
  return g;
}

namespace {

// Monostatic design skeleton: transmit blocks in `tx` order, receive array at
// BS `node` (which must be one of the transmitters).
DesignInstance monostatic_instance(const NetworkChannels& net, const Scenario& scenario,
                                   const SystemConfig& config, int node, const std::vector<int>& tx,
                                   const std::vector<int>& users, int num_beams) {
  const int N = net.antennas;
  const int M = static_cast<int>(net.bs_target.size());
  if (node < 0 || node >= M) throw std::invalid_argument("monostatic node index");
  int own = -1;
  for (std::size_t b = 0; b < tx.size(); ++b) {
    if (tx[b] == node) own = static_cast<int>(b);
  }
  if (own < 0) throw std::invalid_argument("monostatic node must transmit");

  DesignInstance d;
  d.antennas = N;
  d.num_blocks = static_cast<int>(tx.size());
  d.num_beams = num_beams;
  for (int k : users) d.users.push_back({stacked_user_channel(net, k, tx), config.sinr_req, config.user_noise});
  d.power_budget.assign(d.num_blocks, config.per_bs_power_budget);
  for (int m : tx) d.tx_center.push_back(scenario.bs_target_angle(m, 0));
  d.rx_center = scenario.bs_target_angle(node, 0);

  const int ns = d.stacked_dim();
  const auto& h = net.bs_target[node];
  d.echo = MatrixXc::Zero(N, ns);
  d.echo.middleCols(own * N, N) = h[0] * net.bs_target[node][0].adjoint();

  MatrixXc B = MatrixXc::Zero(N, ns);
  for (int b = 0; b < d.num_blocks; ++b) {
    const int m = tx[b];
    auto cols = B.middleCols(b * N, N);
    for (std::size_t j = 1; j < h.size(); ++j) cols += h[j] * net.bs_target[m][j].adjoint();
    if (m == node) continue;
    cols += net.bs_bs[m][node];
    if (config.interference_model == InterferenceModel::kTotalMinusDesired) {
      cols += h[0] * net.bs_target[m][0].adjoint();
    }
  }
  d.interference.push_back({B, 1.0});

  MatrixXc L = MatrixXc::Zero(N, ns);
  L.middleCols(own * N, N) = std::sqrt(config.si_cancellation) * net.self_interference.at(node);
  d.front_end.push_back({L, 1.0});

  d.echo_req = config.echo_power_req;
  d.interference_tol = config.interference_tol;
  d.beamwidth = config.beamwidth;
  d.grid_size = config.grid_size;
  d.spacing = config.antenna_spacing;
  d.validate();
  return d;
}

}  // namespace

DesignInstance make_baseline1_instance(const NetworkChannels& net, const Scenario& scenario,
                                       const SystemConfig& config, int node) {
  std::vector<int> tx;
  for (int m = 0; m < scenario.num_bs(); ++m) tx.push_back(m);
  std::vector<int> users;
  for (int k = 0; k < scenario.num_users(); ++k) users.push_back(k);
  return monostatic_instance(net, scenario, config, node, tx, users,
                             std::max(1, static_cast<int>(users.size())));
}

DesignInstance make_baseline2_instance(const NetworkChannels& net, const Scenario& scenario,
                                       const SystemConfig& config, int m,
                                       const std::vector<int>& users) {
  return monostatic_instance(net, scenario, config, m, {m}, users,
                             std::max(1, static_cast<int>(users.size())));
}

int baseline1_node(const Scenario& scenario, const SystemConfig& config) {
  return config.monostatic_node >= 0 ? config.monostatic_node : nearest_bs_to_target(scenario);
}

BeamformingSolution baseline1_solve(const NetworkChannels& net, const Scenario& scenario,
                                    const SystemConfig& config) {
  const DesignInstance d = make_baseline1_instance(net, scenario, config, baseline1_node(scenario, config));
  return alternating_optimize(d, ao_options(config));
}

namespace {

std::vector<int> users_of(const std::vector<int>& association, int m) {
  std::vector<int> u;
  for (std::size_t k = 0; k < association.size(); ++k) {
    if (association[k] == m) u.push_back(static_cast<int>(k));
  }
  return u;
}

}  // namespace

Baseline2Result baseline2_solve(const NetworkChannels& net, const Scenario& scenario,
                                const SystemConfig& config) {
  Baseline2Result r;
  r.association = associate_users(scenario);
  const AoOptions opt = ao_options(config);
  for (int m = 0; m < scenario.num_bs(); ++m) {
    const DesignInstance d = make_baseline2_instance(net, scenario, config, m, users_of(r.association, m));
    r.per_bs.push_back(alternating_optimize(d, opt));
    r.feasible = r.feasible || r.per_bs.back().usable();
  }
  return r;
}

bool baseline2_feasible(const NetworkChannels& net, const Scenario& scenario,
                        const SystemConfig& config) {
  const auto association = associate_users(scenario);
  const AoOptions opt = ao_options(config);
  for (int m = 0; m < scenario.num_bs(); ++m) {
    const DesignInstance d = make_baseline2_instance(net, scenario, config, m, users_of(association, m));
    if (first_round_check(d, opt).verified) return true;
  }
  return false;
}

}  // namespace misac
