#include "misac/design.hpp"

#include <stdexcept>

namespace misac {

void DesignInstance::validate() const {
  const auto fail = [](const char* what) { throw std::invalid_argument(std::string("design instance: ") + what); };
  if (antennas < 1 || num_blocks < 1) fail("empty array");
  if (num_beams < 1 || static_cast<int>(users.size()) > num_beams) fail("beam count");
  if (static_cast<int>(power_budget.size()) != num_blocks) fail("power budgets");
  if (static_cast<int>(tx_center.size()) != num_blocks) fail("pattern centers");
  for (const auto& u : users) {
    if (u.g.size() != stacked_dim()) fail("user channel dimension");
  }
  if (echo.rows() != antennas || echo.cols() != stacked_dim()) fail("echo channel dimension");
  for (const auto& t : interference) {
    if (t.B.rows() != antennas || t.B.cols() != stacked_dim()) fail("interference channel dimension");
  }
  for (const auto& t : front_end) {
    if (t.L.cols() != stacked_dim()) fail("front-end channel dimension");
  }
  if (grid_size < 2) fail("grid size");
  for (double p : power_budget) {
    if (!(p > 0.0)) fail("power budget must be positive");
  }
  if (!(echo_req >= 0.0) || !(interference_tol >= 0.0)) fail("negative requirement");
}

DesignInstance make_multistatic_instance(const ChannelSet& ch, const Scenario& scenario,
                                         const SystemConfig& config) {
  DesignInstance d;
  d.antennas = ch.antennas;
  d.num_blocks = ch.num_transmitters();
  d.num_beams = ch.num_users();
  for (const auto& g : ch.g_stacked) d.users.push_back({g, config.sinr_req, config.user_noise});
  d.power_budget.assign(d.num_blocks, config.per_bs_power_budget);
  for (int t : ch.transmitters) d.tx_center.push_back(scenario.bs_target_angle(t, 0));
  d.rx_center = scenario.bs_target_angle(ch.receiver, 0);

  d.echo = ch.H.at(0);
  MatrixXc clutter = ch.F_stacked;
  for (int j = 1; j < ch.num_targets(); ++j) clutter += ch.H[j];
  if (config.interference_model == InterferenceModel::kClutterCrosstalk) {
    d.interference.push_back({clutter, 1.0});
  } else {
    d.interference.push_back({clutter + ch.H[0], 1.0});
    d.interference.push_back({ch.H[0], -1.0});
  }
  d.echo_req = config.echo_power_req;
  d.interference_tol = config.interference_tol;
  d.beamwidth = config.beamwidth;
  d.grid_size = config.grid_size;
  d.spacing = config.antenna_spacing;
  d.validate();
  return d;
}

MatrixXc interference_in_z(const DesignInstance& d, const MatrixXc& V) {
  MatrixXc C = MatrixXc::Zero(d.stacked_dim(), d.stacked_dim());
  for (const auto& t : d.interference) C += t.weight * (t.B.adjoint() * V * t.B);
  const double trace_v = V.trace().real();
  for (const auto& t : d.front_end) C += t.weight * trace_v * (t.L.adjoint() * t.L);
  return C;
}

MatrixXc interference_in_v(const DesignInstance& d, const MatrixXc& Z) {
  MatrixXc C = MatrixXc::Zero(d.antennas, d.antennas);
  for (const auto& t : d.interference) C += t.weight * (t.B * Z * t.B.adjoint());
  double leak = 0.0;
  for (const auto& t : d.front_end) leak += t.weight * (t.L * Z * t.L.adjoint()).trace().real();
  C.diagonal().array() += leak;
  return C;
}

}  // namespace misac
