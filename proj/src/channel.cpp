#include "misac/channel.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace misac {

VectorXc steering_vector(double theta, int n, double spacing) {
  VectorXc a(n);
  const double phase = 2.0 * kPi * spacing * std::sin(theta);
  for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, phase * i);
  return a;
}

VectorXc los_target_channel(double rcs, double mu, double d, double theta, int n,
                            double spacing) {
  if (!(d >= kGuardDistance)) throw std::invalid_argument("los_target_channel: distance below guard");
  return std::sqrt(rcs * mu / (d * d)) * steering_vector(theta, n, spacing);
}

MatrixXc complex_gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
  MatrixXc w(rows, cols);
  // Column-major draw order keeps streams stable for a given shape.
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      const double re = n01(rng);
      const double im = n01(rng);
      w(r, c) = {re, im};
    }
  }
  return w;
}

MatrixXc rician_channel(const MatrixXc& mean, double kappa, double pathloss,
                        std::mt19937_64& rng) {
  const MatrixXc w = complex_gaussian(static_cast<int>(mean.rows()), static_cast<int>(mean.cols()), rng);
  const double rms = std::sqrt(mean.squaredNorm() / static_cast<double>(mean.size()));
  const MatrixXc mean_hat = rms > 0.0 ? MatrixXc(mean / rms) : MatrixXc::Zero(mean.rows(), mean.cols());
  double los_w, nlos_w;
  if (std::isinf(kappa)) {
    los_w = 1.0;
    nlos_w = 0.0;
  } else {
    los_w = std::sqrt(kappa / (1.0 + kappa));
    nlos_w = std::sqrt(1.0 / (1.0 + kappa));
  }
  return std::sqrt(pathloss) * (los_w * mean_hat + nlos_w * w);
}

std::mt19937_64 channel_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

NetworkChannels draw_network_channels(const Scenario& s, const SystemConfig& cfg,
                                      std::mt19937_64& rng) {
  const int M = s.num_bs(), K = s.num_users(), T = s.num_targets(), N = cfg.antennas_per_bs;
  const double w = cfg.antenna_spacing;
  NetworkChannels net;
  net.antennas = N;

  net.bs_target.assign(M, {});
  for (int m = 0; m < M; ++m) {
    for (int j = 0; j < T; ++j) {
      net.bs_target[m].push_back(los_target_channel(cfg.target_rcs(j), cfg.mu,
                                                    s.bs_target_distance(m, j),
                                                    s.bs_target_angle(m, j), N, w));
    }
  }

  net.bs_user.assign(M, {});
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      const double d = s.bs_user_distance(m, k);
      const double pl = cfg.mu / std::pow(d, cfg.pathloss_exp_user);
      net.bs_user[m].push_back(
          rician_channel(steering_vector(s.bs_user_angle(m, k), N, w), cfg.rician_factor, pl, rng));
    }
  }

  net.user_target.assign(K, {});
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < T; ++j) {
      const double d = s.user_target_distance(k, j);
      const double pl = cfg.target_rcs(j) * cfg.mu / std::pow(d, cfg.pathloss_exp_user);
      net.user_target[k].push_back(
          rician_channel(MatrixXc::Ones(1, 1), cfg.rician_factor, pl, rng)(0, 0));
    }
  }

  net.bs_bs.assign(M, std::vector<MatrixXc>(M));
  for (int a = 0; a < M; ++a) {
    for (int b = a + 1; b < M; ++b) {
      const double d = s.bs_bs_distance(a, b);
      const double pl = cfg.mu / std::pow(d, cfg.pathloss_exp_other);
      // Arrival at b from a times departure from a towards b.
      const MatrixXc mean = steering_vector(s.bs_bs_angle(b, a), N, w) *
                            steering_vector(s.bs_bs_angle(a, b), N, w).adjoint();
      net.bs_bs[a][b] = rician_channel(mean, cfg.rician_factor, pl, rng);
      net.bs_bs[b][a] = net.bs_bs[a][b].transpose();
    }
  }

  for (int m = 0; m < M; ++m) net.self_interference.push_back(complex_gaussian(N, N, rng));
  return net;
}

ChannelSet stack_channels(const NetworkChannels& net, int receiver,
                          const std::vector<int>& transmitters) {
  const int M = static_cast<int>(net.bs_target.size());
  if (receiver < 0 || receiver >= M) throw std::invalid_argument("stack_channels: receiver index");
  ChannelSet ch;
  ch.antennas = net.antennas;
  ch.receiver = receiver;
  ch.transmitters = transmitters;
  const int N = net.antennas;
  const int Mt = static_cast<int>(transmitters.size());
  const int K = static_cast<int>(net.user_target.size());
  const int T = static_cast<int>(net.bs_target.front().size());
  const int ns = N * Mt;

  for (int t : transmitters) {
    if (t < 0 || t >= M || t == receiver) throw std::invalid_argument("stack_channels: transmitter index");
    ch.g.push_back(net.bs_user[t]);
    ch.f.push_back(net.bs_target[t]);
    ch.F.push_back(net.bs_bs[t][receiver]);
  }
  ch.l = net.user_target;
  ch.h = net.bs_target[receiver];

  for (int k = 0; k < K; ++k) {
    VectorXc gk(ns);
    for (int m = 0; m < Mt; ++m) {
      VectorXc block = ch.g[m][k];
      // Block m of g_k is (g_{m,k}^H + sum_j l_{k,j} f_{m,j}^H)^H.
      for (int j = 0; j < T; ++j) block += std::conj(ch.l[k][j]) * ch.f[m][j];
      gk.segment(m * N, N) = block;
    }
    ch.g_stacked.push_back(std::move(gk));
  }
  for (int j = 0; j < T; ++j) {
    VectorXc fj(ns);
    for (int m = 0; m < Mt; ++m) fj.segment(m * N, N) = ch.f[m][j];
    ch.f_stacked.push_back(fj);
    ch.H.push_back(ch.h[j] * fj.adjoint());
  }
  ch.F_stacked.resize(N, ns);
  for (int m = 0; m < Mt; ++m) ch.F_stacked.middleCols(m * N, N) = ch.F[m];
  return ch;
}

ChannelSet build_channel_set(const Scenario& scenario, const SystemConfig& config, int receiver,
                             std::mt19937_64& rng) {
  const NetworkChannels net = draw_network_channels(scenario, config, rng);
  std::vector<int> tx;
  for (int m = 0; m < scenario.num_bs(); ++m) {
    if (m != receiver) tx.push_back(m);
  }
  return stack_channels(net, receiver, tx);
}

namespace {

void check_beams(const ChannelSet& ch, const std::vector<VectorXc>& beams, const VectorXc& symbols) {
  if (static_cast<int>(beams.size()) != ch.num_users() || symbols.size() != ch.num_users()) {
    throw std::invalid_argument("signal model: beam/symbol count mismatch");
  }
  for (const auto& w : beams) {
    if (w.size() != ch.stacked_dim()) throw std::invalid_argument("signal model: beam dimension mismatch");
  }
}

// x_m = sum_k w_{m,k} b_k
VectorXc transmit_block(const ChannelSet& ch, int m, const std::vector<VectorXc>& beams,
                        const VectorXc& symbols) {
  const int N = ch.antennas;
  VectorXc x = VectorXc::Zero(N);
  for (std::size_t k = 0; k < beams.size(); ++k) x += beams[k].segment(m * N, N) * symbols(k);
  return x;
}

}  // namespace

cdouble received_signal_user(int k, const ChannelSet& ch, const std::vector<VectorXc>& beams,
                             const VectorXc& symbols, cdouble noise) {
  check_beams(ch, beams, symbols);
  cdouble y = noise;
  for (int m = 0; m < ch.num_transmitters(); ++m) {
    const VectorXc x = transmit_block(ch, m, beams, symbols);
    y += ch.g[m][k].dot(x);  // dot() conjugates the left operand
    for (int j = 0; j < ch.num_targets(); ++j) y += ch.l[k][j] * ch.f[m][j].dot(x);
  }
  return y;
}

cdouble received_signal_user_stacked(int k, const ChannelSet& ch,
                                     const std::vector<VectorXc>& beams,
                                     const VectorXc& symbols, cdouble noise) {
  check_beams(ch, beams, symbols);
  const VectorXc& gk = ch.g_stacked[k];
  cdouble desired = gk.dot(beams[k]) * symbols(k);
  cdouble mui = 0.0;
  for (int i = 0; i < ch.num_users(); ++i) {
    if (i != k) mui += gk.dot(beams[i]) * symbols(i);
  }
  return desired + mui + noise;
}

VectorXc received_signal_receiver(const ChannelSet& ch, const std::vector<VectorXc>& beams,
                                  const VectorXc& symbols, const VectorXc& noise) {
  check_beams(ch, beams, symbols);
  if (noise.size() != ch.antennas) throw std::invalid_argument("signal model: noise dimension");
  VectorXc y = noise;
  for (int m = 0; m < ch.num_transmitters(); ++m) {
    const VectorXc x = transmit_block(ch, m, beams, symbols);
    for (int j = 0; j < ch.num_targets(); ++j) y += ch.h[j] * ch.f[m][j].dot(x);
    y += ch.F[m] * x;
  }
  return y;
}

VectorXc received_signal_receiver_stacked(const ChannelSet& ch,
                                          const std::vector<VectorXc>& beams,
                                          const VectorXc& symbols, const VectorXc& noise) {
  check_beams(ch, beams, symbols);
  if (noise.size() != ch.antennas) throw std::invalid_argument("signal model: noise dimension");
  VectorXc x = VectorXc::Zero(ch.stacked_dim());
  for (int k = 0; k < ch.num_users(); ++k) x += beams[k] * symbols(k);
  VectorXc desired = ch.H[0] * x;
  VectorXc clutter = VectorXc::Zero(ch.antennas);
  for (int j = 1; j < ch.num_targets(); ++j) clutter += ch.H[j] * x;
  VectorXc crosstalk = ch.F_stacked * x;
  return desired + clutter + crosstalk + noise;
}

namespace {

void write_matrix(std::ostream& out, const std::string& name, const MatrixXc& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << m(r, c).real() << ',' << m(r, c).imag();
    }
    out << '\n';
  }
}

}  // namespace

void write_channel_dump(std::ostream& out, const ChannelSet& ch) {
  const auto old_precision = out.precision(17);
  out << "misac-channels 1\n";
  for (int k = 0; k < ch.num_users(); ++k) write_matrix(out, "g_" + std::to_string(k), ch.g_stacked[k]);
  for (int j = 0; j < ch.num_targets(); ++j) write_matrix(out, "f_" + std::to_string(j), ch.f_stacked[j]);
  write_matrix(out, "F_M", ch.F_stacked);
  for (int j = 0; j < ch.num_targets(); ++j) write_matrix(out, "H_" + std::to_string(j), ch.H[j]);
  out.precision(old_precision);
}

std::map<std::string, MatrixXc> read_channel_dump(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "misac-channels" || version != 1) {
    throw std::runtime_error("read_channel_dump: bad header");
  }
  std::map<std::string, MatrixXc> out;
  std::string name;
  Eigen::Index rows = 0, cols = 0;
  while (in >> name >> rows >> cols) {
    MatrixXc m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("read_channel_dump: truncated matrix " + name);
        const auto comma = tok.find(',');
        if (comma == std::string::npos) throw std::runtime_error("read_channel_dump: bad token " + tok);
        m(r, c) = {std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1))};
      }
    }
    out.emplace(name, std::move(m));
  }
  return out;
}

}  // namespace misac
