#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "misac/baselines.hpp"
#include "misac/experiments.hpp"
#include "misac/sdr_ao.hpp"
#include "misac/units.hpp"

using namespace misac;

namespace {

// Hand-built instance with generous margins: beam (1, 0) serves the user,
// senses the target and leaks nothing.
DesignInstance toy(int blocks = 1) {
  DesignInstance d;
  d.antennas = 2;
  d.num_blocks = blocks;
  d.num_beams = 1;
  VectorXc g = VectorXc::Zero(2 * blocks);
  g(0) = 1.0;
  g(1) = 0.5;
  d.users.push_back({g, 2.0, 0.1});
  d.power_budget.assign(blocks, 4.0);
  d.tx_center.assign(blocks, 0.0);
  d.echo = MatrixXc::Zero(2, 2 * blocks);
  d.echo.leftCols(2).setIdentity();
  MatrixXc B = MatrixXc::Zero(2, 2 * blocks);
  B(1, 1) = 0.01;
  d.interference.push_back({B, 1.0});
  d.echo_req = 0.5;
  d.interference_tol = 1e-3;
  d.beamwidth = 0.3;
  d.grid_size = 4;
  return d;
}

AoOptions options() { return ao_options(SystemConfig{}); }

// Loose requirements under which every scheme has room to operate.
SystemConfig relaxed_config() {
  SystemConfig c;
  c.si_cancellation = 0.0;
  c.interference_tol = 1.0;
  c.echo_power_req = 1e-20;
  c.sinr_req = 1e-3;
  return c;
}

}  // namespace

TEST(TransmitSubproblem, VariableLayout) {
  const DesignInstance d = toy(2);
  const AngularGrid grid(d.grid_size, d.antennas, d.spacing);
  const auto full = build_transmit_subproblem(d, MatrixXc::Identity(2, 2) / 2.0, grid);
  EXPECT_EQ(full.map.dim, 4);
  EXPECT_TRUE(full.map.w.empty());
  EXPECT_EQ(full.map.zeta.size(), 2u);
  EXPECT_EQ(full.map.t.size(), 2u);
  EXPECT_EQ(full.problem.num_vars(), 16 + 2 + 2 * 4);
  const auto feas = build_transmit_subproblem(d, MatrixXc::Identity(2, 2) / 2.0, grid, true);
  EXPECT_EQ(feas.problem.num_vars(), 16);
  EXPECT_TRUE(feas.map.zeta.empty());
  EXPECT_DOUBLE_EQ(feas.problem.c.norm(), 0.0);

  DesignInstance d3 = d;
  d3.num_beams = 3;
  EXPECT_EQ(build_transmit_subproblem(d3, MatrixXc::Identity(2, 2) / 2.0, grid, true).problem.num_vars(), 3 * 16);
}

TEST(ReceiveSubproblem, VariableLayout) {
  const DesignInstance d = toy();
  const AngularGrid grid(d.grid_size, d.antennas, d.spacing);
  const auto r = build_receive_subproblem(d, MatrixXc::Identity(2, 2), grid);
  EXPECT_EQ(r.problem.num_vars(), 4 + 1 + 4);
  EXPECT_EQ(r.map.grid_size, 4);
}

TEST(ReceiveSubproblem, ZeroTransmitIsInfeasible) {
  const DesignInstance d = toy();
  const AngularGrid grid(d.grid_size, d.antennas, d.spacing);
  const auto r = build_receive_subproblem(d, MatrixXc::Zero(2, 2), grid);
  EXPECT_EQ(conic::solve(r.problem, options().solver).status, conic::SolveStatus::kPrimalInfeasible);
}

TEST(RankOne, Extraction) {
  std::mt19937_64 rng(1);
  VectorXc u = complex_gaussian(5, 1, rng).col(0);
  u.normalize();
  const RankOne r = extract_rank_one(4.0 * u * u.adjoint());
  EXPECT_NEAR(r.ratio, 0.0, 1e-12);
  EXPECT_FALSE(r.zero);
  EXPECT_NEAR(std::abs(r.vector.dot(u)), 2.0, 1e-12);
  EXPECT_GE(r.vector(0).real(), 0.0);
  EXPECT_NEAR(r.vector(0).imag(), 0.0, 1e-12);

  EXPECT_NEAR(extract_rank_one(MatrixXc::Identity(3, 3)).ratio, 1.0, 1e-12);
  EXPECT_TRUE(extract_rank_one(MatrixXc::Zero(3, 3)).zero);

  const MatrixXc A = complex_gaussian(5, 3, rng);
  const MatrixXc X = A * A.adjoint();
  const RankOne x = extract_rank_one(X);
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(X);
  const VectorXd l = es.eigenvalues();
  const double tail = std::sqrt(l(3) * l(3) + l(2) * l(2) + l(1) * l(1) + l(0) * l(0));
  EXPECT_NEAR((X - x.vector * x.vector.adjoint()).norm(), tail, 1e-9 * X.norm());
  EXPECT_NEAR(x.ratio, l(3) / l(4), 1e-12);
}

TEST(AlternatingOptimization, ToyInstance) {
  const DesignInstance d = toy();
  const BeamformingSolution s = alternating_optimize(d, options());
  ASSERT_TRUE(s.usable()) << to_string(s.status);
  ASSERT_FALSE(s.objective_trace.empty());
  for (std::size_t i = 1; i < s.objective_trace.size(); ++i) {
    EXPECT_LE(s.objective_trace[i], s.objective_trace[i - 1] * (1 + 1e-9) + 1e-12);
  }
  EXPECT_EQ(s.rounds, static_cast<int>(s.objective_trace.size()));
  EXPECT_NEAR(s.objective, s.objective_trace.back(), 1e-9 * (1 + std::abs(s.objective)));
  EXPECT_NEAR(s.solver_objective, s.objective, 1e-4 * (1 + std::abs(s.objective)));
  const AngularGrid grid(d.grid_size, d.antennas, d.spacing);
  EXPECT_NEAR(design_objective(d, s.W, s.zeta_tx, s.V, s.zeta_rx, grid), s.objective, 1e-12 * (1 + s.objective));
  EXPECT_NEAR(s.V.trace().real(), 1.0, 1e-6);
  EXPECT_LE(covariance_violation(d, s.W, s.V), 1e-3);
  EXPECT_EQ(s.w.size(), 1u);
  EXPECT_EQ(s.v.size(), 2);
}

TEST(AlternatingOptimization, InfiniteToleranceStopsAfterOneRound) {
  AoOptions o = options();
  o.tolerance = std::numeric_limits<double>::infinity();
  const BeamformingSolution s = alternating_optimize(toy(), o);
  ASSERT_TRUE(s.usable());
  EXPECT_EQ(s.rounds, 1);
  EXPECT_EQ(s.objective_trace.size(), 1u);
}

TEST(AlternatingOptimization, UnreachableEchoIsInfeasible) {
  DesignInstance d = toy();
  d.echo_req = 100.0;  // Tr(V Z) <= Tr Z <= 4
  const BeamformingSolution s = alternating_optimize(d, options());
  EXPECT_EQ(s.status, DesignStatus::kInfeasible);
  EXPECT_FALSE(s.usable());
  EXPECT_EQ(first_round_check(d, options()).status, conic::SolveStatus::kPrimalInfeasible);
}

TEST(FirstRound, VerifiedOnFeasibleToy) {
  const FirstRound f = first_round_check(toy(), options());
  EXPECT_TRUE(conic::has_solution(f.status));
  EXPECT_TRUE(f.verified);
  EXPECT_FALSE(f.screened);
  EXPECT_LE(f.violation, 1e-3);
}

TEST(CovarianceViolation, Cases) {
  const DesignInstance d = toy();
  VectorXc w(2);
  w << 1.0, 0.0;
  MatrixXc V = MatrixXc::Zero(2, 2);
  V(0, 0) = 1.0;
  EXPECT_EQ(covariance_violation(d, {w * w.adjoint()}, V), 0.0);
  // Twice the power budget.
  EXPECT_NEAR(covariance_violation(d, {8.0 * w * w.adjoint()}, V), 1.0, 1e-12);
  EXPECT_GT(covariance_violation(d, {MatrixXc::Zero(2, 2)}, V), 0.5);
  // A negative eigenvalue cannot buy slack.
  MatrixXc W = w * w.adjoint();
  W(1, 1) = -10.0;
  EXPECT_EQ(covariance_violation(d, {W}, V), 0.0);
}

TEST(FrontEndRelaxation, Structure) {
  EXPECT_FALSE(front_end_relaxation(toy()).has_value());
  const SystemConfig c;
  const Trial t = make_trial(c, 3);
  const int node = baseline1_node(t.scenario, c);
  const DesignInstance d = make_baseline1_instance(t.net, t.scenario, c, node);
  const auto r = front_end_relaxation(d);
  ASSERT_TRUE(r.has_value());
  EXPECT_TRUE(r->users.empty());
  EXPECT_TRUE(r->interference.empty());
  EXPECT_EQ(r->num_blocks, 1);
  EXPECT_EQ(r->front_end.size(), 1u);
  // Certified infeasible relaxation implies an infeasible full problem.
  const FirstRound f = first_round_check(d, options());
  if (f.screened) EXPECT_EQ(f.status, conic::SolveStatus::kPrimalInfeasible);
}

TEST(Baselines, NearestAndAssociation) {
  const SystemConfig c;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario s = generate_scenario(c, seed);
    int best = 0;
    for (int m = 1; m < s.num_bs(); ++m) {
      if (s.bs_target_distance(m, 0) < s.bs_target_distance(best, 0)) best = m;
    }
    EXPECT_EQ(nearest_bs_to_target(s), best);
    const auto a = associate_users(s);
    ASSERT_EQ(static_cast<int>(a.size()), s.num_users());
    for (int k = 0; k < s.num_users(); ++k) {
      for (int m = 0; m < s.num_bs(); ++m) EXPECT_LE(s.bs_user_distance(a[k], k), s.bs_user_distance(m, k));
    }
    SystemConfig fixed = c;
    fixed.monostatic_node = 2;
    EXPECT_EQ(baseline1_node(s, fixed), 2);
    EXPECT_EQ(baseline1_node(s, c), best);
  }
}

TEST(Baselines, SchemeNames) {
  for (Scheme s : {Scheme::kProposed, Scheme::kBaseline1, Scheme::kBaseline2}) {
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  }
  EXPECT_THROW(parse_scheme("baseline3"), std::invalid_argument);
}

TEST(Baselines, SelfInterferenceTerm) {
  SystemConfig c;
  const Trial t = make_trial(c, 4);
  const int node = 1;
  const DesignInstance d = make_baseline1_instance(t.net, t.scenario, c, node);
  ASSERT_EQ(d.num_blocks, 3);
  ASSERT_EQ(d.front_end.size(), 1u);
  const int N = d.antennas;
  VectorXc x = VectorXc::Zero(d.stacked_dim());
  x.segment(node * N, N).setOnes();
  DesignInstance only_si = d;
  only_si.interference.clear();
  const MatrixXc V = MatrixXc::Identity(N, N) / N;
  const double got = (interference_in_z(only_si, V) * x * x.adjoint()).trace().real();
  const double want = c.si_cancellation * (t.net.self_interference[node] * VectorXc::Ones(N)).squaredNorm();
  EXPECT_NEAR(got, want, 1e-9 * want);
  // The receive beam cannot null it: same value for any unit-trace V.
  const MatrixXc V2 = steering_vector(0.3, N, d.spacing) * steering_vector(0.3, N, d.spacing).adjoint() / N;
  EXPECT_NEAR((interference_in_z(only_si, V2) * x * x.adjoint()).trace().real(), want, 1e-9 * want);

  c.si_cancellation = 0.0;
  const DesignInstance z = make_baseline1_instance(t.net, t.scenario, c, node);
  EXPECT_EQ(z.front_end[0].L.norm(), 0.0);
  // The echo only involves the node's own block.
  for (int b = 0; b < d.num_blocks; ++b) {
    if (b != node) EXPECT_EQ(d.echo.middleCols(b * N, N).norm(), 0.0);
  }
  EXPECT_GT(d.echo.middleCols(node * N, N).norm(), 0.0);
}

TEST(Baselines, PerBsInstances) {
  const SystemConfig c;
  const Trial t = make_trial(c, 5);
  const DesignInstance empty = make_baseline2_instance(t.net, t.scenario, c, 0, {});
  EXPECT_EQ(empty.num_beams, 1);
  EXPECT_TRUE(empty.users.empty());
  EXPECT_EQ(empty.num_blocks, 1);
  const DesignInstance two = make_baseline2_instance(t.net, t.scenario, c, 1, {0, 2});
  EXPECT_EQ(two.num_beams, 2);
  ASSERT_EQ(two.users.size(), 2u);
  EXPECT_LT((two.users[1].g - stacked_user_channel(t.net, 2, {1})).norm(), 1e-15);
  EXPECT_EQ(two.users[0].g.size(), t.net.antennas);
}

TEST(Baselines, AggregateRule) {
  const SystemConfig loose = relaxed_config();
  const Trial t = make_trial(loose, 2);
  const FeasibilityCheck f = check_scheme_feasibility(Scheme::kBaseline2, t, loose);
  EXPECT_EQ(f.outcome, TrialOutcome::kFeasible) << f.detail;
  EXPECT_EQ(f.detail.rfind("bs ", 0), 0u);
  EXPECT_TRUE(baseline2_feasible(t.net, t.scenario, loose));

  SystemConfig strict;
  strict.interference_tol = dbm_to_watt(-110.0);
  const Trial s = make_trial(strict, 2);
  const FeasibilityCheck g = check_scheme_feasibility(Scheme::kBaseline2, s, strict);
  EXPECT_NE(g.outcome, TrialOutcome::kFeasible);
  EXPECT_FALSE(baseline2_feasible(s.net, s.scenario, strict));
}

TEST(Sweep, SpecValidation) {
  SweepSpec s = default_sweep();
  EXPECT_EQ(s.i_tol_dbm.size(), 16u);
  EXPECT_EQ(s.i_tol_dbm.front(), -110.0);
  EXPECT_EQ(s.i_tol_dbm.back(), -80.0);
  EXPECT_NO_THROW(s.validate());
  s.i_tol_dbm = {-100, -100};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.i_tol_dbm = {-80, -90, -85};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.i_tol_dbm = {-80, -90};
  EXPECT_NO_THROW(s.validate());
  s.trials = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.trials = 1;
  s.schemes.clear();
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Sweep, RecordsRatesAndDeterminism) {
  SweepSpec spec;
  spec.i_tol_dbm = {-110.0, -60.0};
  spec.trials = 2;
  spec.schemes = {Scheme::kBaseline1, Scheme::kBaseline2};
  const SystemConfig c;
  const SweepResult a = run_infeasibility_sweep(spec, c);
  ASSERT_EQ(a.records.size(), 2u * 2u * 2u);
  ASSERT_EQ(a.summary.size(), 4u);
  for (const auto& row : a.summary) {
    EXPECT_EQ(row.trials, 2);
    EXPECT_DOUBLE_EQ(row.rate(), row.infeasible / 2.0);
  }
  EXPECT_EQ(a.records[0].trial, 0);
  EXPECT_EQ(a.records[0].seed, 1u);
  EXPECT_EQ(a.records.back().seed, 2u);
  for (const auto& r : a.records) EXPECT_EQ(r.feasible, r.outcome == TrialOutcome::kFeasible);

  spec.workers = 2;
  const SweepResult b = run_infeasibility_sweep(spec, c);
  std::ostringstream ca, cb;
  write_infeasibility_csv(ca, a.summary);
  write_infeasibility_csv(cb, b.summary);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(ca.str().substr(0, ca.str().find('\n')), "i_tol_dbm,scheme,trials,infeasible,rate");

  std::ostringstream j;
  write_records_jsonl(j, a.records);
  std::istringstream lines(j.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto doc = nlohmann::json::parse(line);
    EXPECT_TRUE(doc.contains("outcome"));
    ++n;
  }
  EXPECT_EQ(n, 8);
}

TEST(Sweep, SingleProposedTrial) {
  SweepSpec spec;
  spec.i_tol_dbm = {-96.0};
  spec.trials = 1;
  spec.schemes = {Scheme::kProposed};
  const SweepResult r = run_infeasibility_sweep(spec, SystemConfig{});
  ASSERT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.summary.size(), 1u);
  EXPECT_EQ(r.summary[0].infeasible, r.records[0].feasible ? 0 : 1);
  EXPECT_NE(r.records[0].outcome, TrialOutcome::kError) << r.records[0].detail;
}

TEST(BeampatternCsv, Layout) {
  BeampatternTable t;
  t.angle_deg = {-1.0, 0.0, 1.0};
  t.ideal = {0.0, 1.0, 0.0};
  t.tx = {{0.5, 1.0, 0.25}, {1.0, 0.5, 0.0}};
  t.rx = {0.1, 1.0, 0.1};
  std::ostringstream o;
  write_beampattern_csv(o, t);
  EXPECT_EQ(o.str(), "angle_deg,ideal,tx_1,tx_2,rx\n-1,0,0.5,1,0.1\n0,1,1,0.5,1\n1,0,0.25,0,0.1\n");
}

TEST(TransmitSubproblem, NoWorseThanMatchedFilterBeams) {
  // Users and leakage dropped, echo requirement set to half of what the
  // matched-filter beams (towards each block's own center, N W per block)
  // deliver: those beams are feasible, so the optimum cannot exceed their
  // mismatch for any zeta.
  const SystemConfig c;
  const Trial t = make_trial(c, 6);
  DesignInstance d = proposed_instance(t, c);
  d.users.clear();
  d.num_beams = 2;
  d.interference.clear();
  d.front_end.clear();
  const AngularGrid grid(d.grid_size, d.antennas, d.spacing);
  const MatrixXc V = initial_receive_covariance(d);

  VectorXc w = VectorXc::Zero(d.stacked_dim());
  for (int m = 0; m < d.num_blocks; ++m) {
    w.segment(m * d.antennas, d.antennas) = steering_vector(d.tx_center[m], d.antennas, d.spacing);
  }
  const MatrixXc Z = w * w.adjoint();
  ASSERT_LE(double(d.antennas), d.power_budget[0]);
  d.echo_req = 0.5 * echo_power(V, Z, d.echo);
  ASSERT_GT(d.echo_req, 0.0);
  EXPECT_EQ(covariance_violation(d, {Z, MatrixXc::Zero(d.stacked_dim(), d.stacked_dim())}, V), 0.0);

  const auto sub = build_transmit_subproblem(d, V, grid);
  const auto r = conic::solve(sub.problem, options().solver);
  ASSERT_TRUE(conic::has_solution(r.status)) << conic::to_string(r.status);
  for (double zeta : {0.0, 1.0, double(d.antennas)}) {
    double heuristic = 0.0;
    for (int m = 0; m < d.num_blocks; ++m) {
      heuristic += transmit_mismatch(zeta, Z, m, ideal_pattern(d.tx_center[m], d.beamwidth, grid), grid);
    }
    EXPECT_LE(r.objective, heuristic * (1 + 1e-6)) << zeta;
  }
  // The solver's value is the mismatch of its own point.
  const TransmitBlock tb = read_transmit_solution(sub.map, r.x);
  MatrixXc Zs = MatrixXc::Zero(d.stacked_dim(), d.stacked_dim());
  for (const auto& W : tb.W) Zs += W;
  double own = 0.0;
  for (int m = 0; m < d.num_blocks; ++m) {
    own += transmit_mismatch(tb.zeta[m], Zs, m, ideal_pattern(d.tx_center[m], d.beamwidth, grid), grid);
  }
  EXPECT_NEAR(own, r.objective, 1e-4 * std::max(1.0, own));

  // Without any requirement the all-zero design is optimal.
  d.echo_req = 0.0;
  const auto zero = conic::solve(build_transmit_subproblem(d, V, grid).problem, options().solver);
  ASSERT_TRUE(conic::has_solution(zero.status)) << conic::to_string(zero.status);
  EXPECT_NEAR(zero.objective, 0.0, 1e-4);
}
