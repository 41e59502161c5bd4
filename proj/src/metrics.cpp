#include "misac/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "misac/beampattern.hpp"

namespace misac {

double sinr(int k, const VectorXc& g, const std::vector<VectorXc>& beams, double noise) {
  if (k < 0 || k >= static_cast<int>(beams.size())) throw std::invalid_argument("sinr: user index");
  double signal = 0.0;
  double interference = 0.0;
  for (int i = 0; i < static_cast<int>(beams.size()); ++i) {
    if (beams[i].size() != g.size()) throw std::invalid_argument("sinr: beam dimension");
    const double p = std::norm(g.dot(beams[i]));
    if (i == k) signal = p;
    else interference += p;
  }
  return signal / (interference + noise);
}

double sinr(int k, const ChannelSet& ch, const std::vector<VectorXc>& beams, double noise) {
  return sinr(k, ch.g_stacked.at(k), beams, noise);
}

void require_psd(const MatrixXc& X, const char* what) {
  require_hermitian(X, what);
  if (X.size() == 0) return;
  const MatrixXc H = 0.5 * (X + X.adjoint());
  const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<MatrixXc>(H, Eigen::EigenvaluesOnly).eigenvalues();
  const double scale = std::max(std::abs(lam.minCoeff()), std::abs(lam.maxCoeff()));
  if (lam.minCoeff() < -1e-8 * std::max(scale, 1e-300)) {
    throw std::invalid_argument(std::string(what) + ": matrix not positive semidefinite");
  }
}

double echo_power(const MatrixXc& V, const MatrixXc& Z, const MatrixXc& E) {
  require_psd(V, "echo_power V");
  require_psd(Z, "echo_power Z");
  if (E.rows() != V.rows() || E.cols() != Z.rows()) throw std::invalid_argument("echo_power: dimension");
  return std::max(0.0, (V * E * Z * E.adjoint()).trace().real());
}

double echo_power(const MatrixXc& V, const MatrixXc& Z, const ChannelSet& ch) {
  return echo_power(V, Z, ch.H.at(0));
}

double interference_power(const MatrixXc& V, const MatrixXc& Z, const DesignInstance& d) {
  require_psd(V, "interference_power V");
  require_psd(Z, "interference_power Z");
  if (V.rows() != d.antennas || Z.rows() != d.stacked_dim()) {
    throw std::invalid_argument("interference_power: dimension");
  }
  return (interference_in_z(d, V) * Z).trace().real();
}

double interference_power(const MatrixXc& V, const MatrixXc& Z, const ChannelSet& ch) {
  require_psd(V, "interference_power V");
  require_psd(Z, "interference_power Z");
  MatrixXc A = ch.F_stacked;
  for (int j = 1; j < ch.num_targets(); ++j) A += ch.H[j];
  return std::max(0.0, (V * A * Z * A.adjoint()).trace().real());
}

double per_bs_power(int m, const std::vector<VectorXc>& beams, int antennas) {
  double p = 0.0;
  for (const auto& w : beams) {
    if (w.size() < (m + 1) * antennas || m < 0) throw std::invalid_argument("per_bs_power: block index");
    p += w.segment(m * antennas, antennas).squaredNorm();
  }
  return p;
}

MatrixXc beam_covariance(const std::vector<VectorXc>& beams, int dim) {
  MatrixXc Z = MatrixXc::Zero(dim, dim);
  for (const auto& w : beams) Z += w * w.adjoint();
  return Z;
}

QosReport check_feasibility(const DesignInstance& d, const std::vector<VectorXc>& beams,
                            const VectorXc& v, double rel_tol, double receiver_noise) {
  if (static_cast<int>(beams.size()) != d.num_beams) throw std::invalid_argument("check_feasibility: beam count");
  if (v.size() != d.antennas) throw std::invalid_argument("check_feasibility: receive beam dimension");
  QosReport r;
  r.rel_tol = rel_tol;
  r.receiver_noise = receiver_noise;
  const MatrixXc Z = beam_covariance(beams, d.stacked_dim());
  const MatrixXc V = v * v.adjoint();

  bool ok = true;
  for (int m = 0; m < d.num_blocks; ++m) {
    const double p = per_bs_power(m, beams, d.antennas);
    r.per_bs_power.push_back(p);
    r.margin_power.push_back(d.power_budget[m] - p);
    ok = ok && r.margin_power.back() >= -rel_tol * d.power_budget[m];
  }
  r.receive_norm = v.squaredNorm();
  r.margin_norm = -std::abs(r.receive_norm - 1.0);
  ok = ok && r.margin_norm >= -rel_tol;

  const VectorXc u = d.echo.adjoint() * v;
  r.echo_power = std::max(0.0, u.dot(Z * u).real());
  r.margin_echo = r.echo_power - d.echo_req;
  ok = ok && r.margin_echo >= -rel_tol * d.echo_req;

  r.interference = (interference_in_z(d, V) * Z).trace().real();
  r.margin_interference = d.interference_tol - r.interference;
  ok = ok && r.margin_interference >= -rel_tol * d.interference_tol;

  for (int k = 0; k < static_cast<int>(d.users.size()); ++k) {
    const auto& u = d.users[k];
    r.sinr.push_back(sinr(k, u.g, beams, u.noise));
    r.margin_sinr.push_back(r.sinr.back() - u.sinr_req);
    ok = ok && r.margin_sinr.back() >= -rel_tol * u.sinr_req;
  }
  r.feasible = ok;
  return r;
}

nlohmann::json to_json(const QosReport& r) {
  return nlohmann::json{
      {"sinr", r.sinr},
      {"echo_power", r.echo_power},
      {"interference", r.interference},
      {"receiver_noise", r.receiver_noise},
      {"per_bs_power", r.per_bs_power},
      {"receive_norm", r.receive_norm},
      {"margin_power", r.margin_power},
      {"margin_norm", r.margin_norm},
      {"margin_echo", r.margin_echo},
      {"margin_interference", r.margin_interference},
      {"margin_sinr", r.margin_sinr},
      {"feasible", r.feasible},
      {"rel_tol", r.rel_tol},
  };
}

}  // namespace misac
