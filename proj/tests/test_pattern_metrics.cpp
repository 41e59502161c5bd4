#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "misac/beampattern.hpp"
#include "misac/channel.hpp"
#include "misac/conic/cone.hpp"
#include "misac/conic/hermitian.hpp"
#include "misac/design.hpp"
#include "misac/experiments.hpp"
#include "misac/metrics.hpp"

using namespace misac;

namespace {

MatrixXc random_psd(int n, int rank, std::mt19937_64& rng) {
  const MatrixXc A = complex_gaussian(n, rank, rng);
  return A * A.adjoint();
}

VectorXc random_cvec(int n, std::mt19937_64& rng) { return complex_gaussian(n, 1, rng).col(0); }

}  // namespace

TEST(Grid, LeftClosedUniform) {
  const AngularGrid g(360, 9, 0.5);
  EXPECT_EQ(g.size(), 360);
  EXPECT_DOUBLE_EQ(g.direction(0), -kPi / 2);
  EXPECT_NEAR(g.direction(359), kPi / 2 - kPi / 360, 1e-15);
  EXPECT_NEAR(g.direction(180), 0.0, 1e-15);
  EXPECT_EQ(g.stacked_steering(10, 2).size(), 18);
  EXPECT_THROW(AngularGrid(1, 9, 0.5), std::invalid_argument);
}

TEST(IdealPattern, MaskCounts) {
  const AngularGrid g(360, 9, 0.5);
  EXPECT_EQ(ideal_pattern(0.0, deg_to_rad(10.0), g).ones(), 21);
  EXPECT_LE(ideal_pattern(0.1234, 0.0, g).ones(), 1);
  EXPECT_EQ(ideal_pattern(0.0, kPi, g).ones(), 360);
}

TEST(TransmitPattern, Cases) {
  const AngularGrid g(90, 3, 0.5);
  const int n = 6;
  EXPECT_EQ(transmit_pattern_value(MatrixXc::Zero(n, n), 1, 7, g), cdouble(0.0, 0.0));
  for (int m = 0; m < 2; ++m) {
    const cdouble v = transmit_pattern_value(MatrixXc::Identity(n, n), m, 11, g);
    EXPECT_NEAR(v.real(), 3.0, 1e-12);
    EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  }
  std::mt19937_64 rng(1);
  const VectorXc x = random_cvec(n, rng);
  const VectorXc a = g.stacked_steering(20, 2);
  VectorXc dx = VectorXc::Zero(n);
  dx.segment(3, 3) = a.segment(3, 3);
  const cdouble expected = a.dot(x) * x.dot(dx);  // (a^H x)(x^H D_1 a)
  EXPECT_LT(std::abs(transmit_pattern_value(x * x.adjoint(), 1, 20, g) - expected), 1e-12);
  EXPECT_LT(std::abs(transmit_pattern_at(x * x.adjoint(), 1, g.direction(20), 3, 0.5) - expected), 1e-12);

  MatrixXc bad = MatrixXc::Zero(n, n);
  bad(0, 1) = 1.0;
  EXPECT_THROW(transmit_mismatch(1.0, bad, 0, ideal_pattern(0.0, 0.2, g), g), std::invalid_argument);
}

TEST(Mismatch, ZeroCases) {
  const AngularGrid g(360, 3, 0.5);
  const IdealPattern p = ideal_pattern(0.0, deg_to_rad(10.0), g);
  EXPECT_NEAR(transmit_mismatch(2.0, MatrixXc::Zero(6, 6), 0, p, g), 42.0, 1e-12);
  EXPECT_NEAR(transmit_mismatch(0.0, MatrixXc::Zero(6, 6), 1, p, g), 0.0, 0.0);
  EXPECT_NEAR(receive_mismatch(1.5, MatrixXc::Zero(3, 3), p, g), 1.5 * 21, 1e-12);
  // V = I/N has a flat unit pattern: only off-mask points contribute.
  EXPECT_NEAR(receive_mismatch(1.0, MatrixXc::Identity(3, 3) / 3.0, p, g), 360 - 21, 1e-9);
}

TEST(Mismatch, PerfectMatchOnSyntheticPattern) {
  // A pattern synthesized as a non-negative combination of grid matched
  // filters and read back with its own values as the ideal has zero error.
  const AngularGrid g(8, 2, 0.5);
  const VectorXc a = g.steering(3);
  const MatrixXc V = a * a.adjoint() / 2.0;
  IdealPattern p;
  p.mask = VectorXd(g.size());
  for (int i = 0; i < g.size(); ++i) p.mask(i) = receive_pattern_value(V, i, g) / 2.0;
  EXPECT_NEAR(receive_mismatch(2.0, V, p, g), 0.0, 1e-12);
}

TEST(ReceivePattern, MatchedFilterPeak) {
  const AngularGrid g(360, 9, 0.5);
  const int i0 = 200;
  const VectorXc v = g.steering(i0) / 3.0;
  const MatrixXc V = v * v.adjoint();
  int best = 0;
  for (int i = 0; i < g.size(); ++i) {
    if (receive_pattern_value(V, i, g) > receive_pattern_value(V, best, g)) best = i;
  }
  EXPECT_EQ(best, i0);
  EXPECT_NEAR(receive_pattern_value(V, i0, g), 9.0, 1e-12);
  EXPECT_NEAR(receive_pattern_at(V, g.direction(i0), 0.5), 9.0, 1e-12);
}

TEST(Mismatch, NonNegativeAndMidpointConvex) {
  std::mt19937_64 rng(3);
  const AngularGrid g(60, 3, 0.5);
  const IdealPattern p = ideal_pattern(0.2, 0.4, g);
  for (int t = 0; t < 20; ++t) {
    const MatrixXc Z1 = random_psd(6, 2, rng), Z2 = random_psd(6, 2, rng);
    const double z1 = std::abs(random_cvec(1, rng)(0)), z2 = -std::abs(random_cvec(1, rng)(0));
    const double f1 = transmit_mismatch(z1, Z1, 1, p, g);
    const double f2 = transmit_mismatch(z2, Z2, 1, p, g);
    EXPECT_GE(f1, 0.0);
    EXPECT_LE(transmit_mismatch(0.5 * (z1 + z2), 0.5 * (Z1 + Z2), 1, p, g), 0.5 * (f1 + f2) + 1e-9);
    const MatrixXc V1 = random_psd(3, 1, rng), V2 = random_psd(3, 2, rng);
    const double r1 = receive_mismatch(z1, V1, p, g), r2 = receive_mismatch(z2, V2, p, g);
    EXPECT_LE(receive_mismatch(0.5 * (z1 + z2), 0.5 * (V1 + V2), p, g), 0.5 * (r1 + r2) + 1e-9);
    const VectorXc a = g.steering(t);
    EXPECT_LT(std::abs(a.dot(V2 * a).imag()), 1e-12 * (1.0 + V2.norm()));
  }
}

TEST(Hermitian, EmbeddingRoundTripAndPsd) {
  std::mt19937_64 rng(4);
  const MatrixXc H = random_psd(4, 2, rng);
  const Eigen::MatrixXd X = conic::hermitian_embed(H);
  EXPECT_LT((conic::hermitian_extract(X) - H).norm(), 1e-12);
  EXPECT_NEAR(X.trace(), 2.0 * H.trace().real(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
  EXPECT_LT((conic::hermitian_from_params(conic::hermitian_params(H), 4) - H).norm(), 1e-12);
  EXPECT_EQ(conic::hermitian_param_count(4), 16);
  EXPECT_LT((conic::hermitian_from_svec(conic::svec(X), 4) - H).norm(), 1e-12);
}

TEST(Hermitian, TraceForm) {
  std::mt19937_64 rng(5);
  const MatrixXc C = complex_gaussian(3, 3, rng);
  const MatrixXc H = random_psd(3, 3, rng);
  const auto f = conic::trace_form(C);
  const VectorXd x = conic::hermitian_params(H);
  const cdouble expected = (C * H).trace();
  EXPECT_NEAR(f.re.dot(x), expected.real(), 1e-10);
  EXPECT_NEAR(f.im.dot(x), expected.imag(), 1e-10);
}

TEST(Hermitian, EmbeddingMapMatchesSvec) {
  std::mt19937_64 rng(6);
  for (int n : {1, 2, 5}) {
    const MatrixXc H = complex_gaussian(n, n, rng);
    const MatrixXc Hh = 0.5 * (H + H.adjoint());
    const VectorXd x = conic::hermitian_params(Hh);
    const VectorXd target = conic::svec(conic::hermitian_embed(Hh));
    VectorXd built = VectorXd::Zero(target.size());
    const auto map = conic::hermitian_embedding_map(n);
    ASSERT_EQ(static_cast<int>(map.size()), n * n);
    for (int p = 0; p < n * n; ++p) {
      for (const auto& t : map[p]) {
        if (t.index >= 0) built(t.index) += t.weight * x(p);
      }
    }
    EXPECT_LT((built - target).norm(), 1e-12) << n;

    // The other direction recovers the coordinates from any svec.
    const auto back = conic::param_to_svec_map(n);
    VectorXd xr = VectorXd::Zero(n * n);
    for (int p = 0; p < n * n; ++p) {
      for (const auto& t : back[p]) {
        if (t.index >= 0) xr(p) += t.weight * target(t.index);
      }
    }
    EXPECT_LT((xr - x).norm(), 1e-12) << n;
  }
}

TEST(Metrics, Sinr) {
  std::mt19937_64 rng(7);
  const VectorXc g = random_cvec(4, rng);
  const VectorXc w = random_cvec(4, rng);
  EXPECT_NEAR(sinr(0, g, {w}, 0.5), std::norm(g.dot(w)) / 0.5, 1e-12);
  VectorXc orth = random_cvec(4, rng);
  orth -= g * (g.dot(orth) / g.squaredNorm());
  EXPECT_NEAR(sinr(0, g, {orth, w}, 0.5), 0.0, 1e-20);
  EXPECT_EQ(sinr(1, g, {VectorXc::Zero(4), VectorXc::Zero(4)}, 1.0), 0.0);
}

TEST(Metrics, EchoAndInterferenceRankOne) {
  SystemConfig c;
  const Scenario s = generate_scenario(c, 11);
  auto rng = channel_rng(11);
  const ChannelSet ch = build_channel_set(s, c, 2, rng);
  std::mt19937_64 r(8);
  const VectorXc v = random_cvec(ch.antennas, r);
  const VectorXc x = random_cvec(ch.stacked_dim(), r);
  const MatrixXc V = v * v.adjoint(), Z = x * x.adjoint();
  const double pe = std::norm(v.dot(ch.h[0])) * std::norm(ch.f_stacked[0].dot(x));
  EXPECT_NEAR(echo_power(V, Z, ch), pe, 1e-9 * pe);
  EXPECT_NEAR(echo_power(V, 2.0 * Z, ch), 2.0 * pe, 1e-9 * pe);
  EXPECT_EQ(echo_power(V, MatrixXc::Zero(ch.stacked_dim(), ch.stacked_dim()), ch), 0.0);
  MatrixXc A = ch.F_stacked;
  for (int j = 1; j < ch.num_targets(); ++j) A += ch.H[j];
  const double pi = std::norm(v.dot(A * x));
  EXPECT_NEAR(interference_power(V, Z, ch), pi, 1e-9 * pi);
  const DesignInstance d = make_multistatic_instance(ch, s, c);
  EXPECT_NEAR(interference_power(V, Z, d), pi, 1e-9 * pi);
  MatrixXc bad = Z;
  bad(0, 0) = -1.0;
  EXPECT_THROW(echo_power(V, bad, ch), std::invalid_argument);
}

TEST(Metrics, LinearityInBothArguments) {
  std::mt19937_64 rng(9);
  const MatrixXc E = complex_gaussian(3, 6, rng);
  for (int t = 0; t < 10; ++t) {
    const MatrixXc V1 = random_psd(3, 2, rng), V2 = random_psd(3, 1, rng);
    const MatrixXc Z1 = random_psd(6, 3, rng), Z2 = random_psd(6, 2, rng);
    const double a = echo_power(V1 + V2, Z1, E), b = echo_power(V1, Z1, E) + echo_power(V2, Z1, E);
    EXPECT_NEAR(a, b, 1e-10 * a);
    const double c = echo_power(V1, Z1 + Z2, E), d = echo_power(V1, Z1, E) + echo_power(V1, Z2, E);
    EXPECT_NEAR(c, d, 1e-10 * c);
  }
}

TEST(Metrics, PerBsPower) {
  std::vector<VectorXc> beams(1, VectorXc::Zero(18));
  EXPECT_EQ(per_bs_power(0, beams, 9), 0.0);
  beams[0].segment(9, 9).setOnes();
  EXPECT_NEAR(per_bs_power(1, beams, 9), 9.0, 1e-15);
  std::mt19937_64 rng(10);
  beams = {random_cvec(18, rng), random_cvec(18, rng)};
  EXPECT_NEAR(per_bs_power(0, beams, 9) + per_bs_power(1, beams, 9),
              beams[0].squaredNorm() + beams[1].squaredNorm(), 1e-12);
}

namespace {

// Two-antenna, one-block instance built by hand with generous margins.
DesignInstance toy_instance() {
  DesignInstance d;
  d.antennas = 2;
  d.num_blocks = 1;
  d.num_beams = 1;
  VectorXc g(2);
  g << 1.0, 0.5;
  d.users.push_back({g, 2.0, 0.1});
  d.power_budget = {4.0};
  d.tx_center = {0.0};
  d.echo = MatrixXc::Identity(2, 2);
  MatrixXc B = MatrixXc::Zero(2, 2);
  B(1, 1) = 0.01;
  d.interference.push_back({B, 1.0});
  d.echo_req = 0.5;
  d.interference_tol = 1e-3;
  d.beamwidth = 0.2;
  d.grid_size = 8;
  return d;
}

}  // namespace

TEST(Feasibility, Verdicts) {
  const DesignInstance d = toy_instance();
  VectorXc w(2);
  w << 1.0, 0.0;
  VectorXc v(2);
  v << 1.0, 0.0;
  const QosReport ok = check_feasibility(d, {w}, v, 1e-3);
  EXPECT_TRUE(ok.feasible);
  EXPECT_GT(ok.margin_echo, 0.0);
  EXPECT_GE(ok.margin_interference, 0.0);

  const QosReport zero = check_feasibility(d, {VectorXc::Zero(2)}, v, 1e-3);
  EXPECT_FALSE(zero.feasible);
  EXPECT_LT(zero.margin_echo, 0.0);
  EXPECT_LT(zero.margin_sinr[0], 0.0);

  EXPECT_FALSE(check_feasibility(d, {w}, VectorXc(1.1 * v), 1e-3).feasible);

  // Common phase rotations do not change the verdict or margins.
  const cdouble ph = std::polar(1.0, 0.7);
  const QosReport rot = check_feasibility(d, {VectorXc(ph * w)}, VectorXc(std::conj(ph) * v), 1e-3);
  EXPECT_EQ(rot.feasible, ok.feasible);
  EXPECT_NEAR(rot.margin_echo, ok.margin_echo, 1e-12);
  EXPECT_NEAR(rot.margin_sinr[0], ok.margin_sinr[0], 1e-12);
}

TEST(BeampatternTable, NormalizedAndAligned) {
  SystemConfig c;
  const Trial t = make_trial(c, 1);
  const DesignInstance d = proposed_instance(t, c);
  std::vector<VectorXc> beams;
  // Matched-filter beams towards each transmitter's own center.
  for (int k = 0; k < d.num_beams; ++k) {
    VectorXc w = VectorXc::Zero(d.stacked_dim());
    for (int m = 0; m < d.num_blocks; ++m) w.segment(m * d.antennas, d.antennas) = steering_vector(d.tx_center[m], d.antennas, d.spacing);
    beams.push_back(w);
  }
  const VectorXc v = steering_vector(d.rx_center, d.antennas, d.spacing) / 3.0;
  const BeampatternTable tab = beampattern_table(d, beams, v);
  ASSERT_EQ(static_cast<int>(tab.angle_deg.size()), d.grid_size);
  ASSERT_EQ(static_cast<int>(tab.tx.size()), d.num_blocks);
  EXPECT_NEAR(*std::max_element(tab.rx.begin(), tab.rx.end()), 1.0, 1e-15);
  for (const auto& col : tab.tx) EXPECT_NEAR(*std::max_element(col.begin(), col.end()), 1.0, 1e-15);
  const auto peak = std::max_element(tab.rx.begin(), tab.rx.end()) - tab.rx.begin();
  EXPECT_NEAR(tab.angle_deg[peak], 0.0, 1e-9);
  EXPECT_EQ(std::count(tab.ideal.begin(), tab.ideal.end(), 1.0), 21);

  const BeampatternTable zero = beampattern_table(d, std::vector<VectorXc>(d.num_beams, VectorXc::Zero(d.stacked_dim())), v);
  for (const auto& col : zero.tx) EXPECT_EQ(*std::max_element(col.begin(), col.end()), 0.0);
}
