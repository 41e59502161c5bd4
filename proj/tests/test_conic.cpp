#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "misac/conic/cone.hpp"
#include "misac/conic/problem.hpp"
#include "misac/conic/solver.hpp"
#include "support/planted.hpp"

using namespace misac::conic;
using misac::test_support::planted;
using misac::test_support::random_vector;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  MatrixXd X(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) X(i, j) = X(j, i) = d(rng);
  return X;
}

SolverSettings tight() {
  SolverSettings st;
  st.eps_abs = 1e-8;
  st.eps_rel = 1e-8;
  return st;
}

}  // namespace

TEST(Svec, RoundTripAndInnerProduct) {
  std::mt19937_64 rng(3);
  const MatrixXd X = random_symmetric(5, rng);
  const MatrixXd Y = random_symmetric(5, rng);
  EXPECT_LT((smat(svec(X), 5) - X).norm(), 1e-14);
  EXPECT_NEAR(svec(X).dot(svec(Y)), (X * Y).trace(), 1e-12);
  EXPECT_EQ(svec_index(0, 0, 5), 0);
  EXPECT_EQ(svec_index(4, 0, 5), 4);
  EXPECT_EQ(svec_index(1, 1, 5), 5);
  EXPECT_EQ(svec_index(4, 4, 5), 14);
}

TEST(Projection, SecondOrderCases) {
  VectorXd inside(3);
  inside << 2.0, 1.0, 1.0;
  EXPECT_LT((project(inside, Cone::soc(3)) - inside).norm(), 1e-15);
  VectorXd polar(3);
  polar << -2.0, 1.0, 1.0;
  EXPECT_LT(project(polar, Cone::soc(3)).norm(), 1e-15);
  VectorXd outside(3);
  outside << 0.0, 3.0, 4.0;
  VectorXd expected(3);
  expected << 2.5, 1.5, 2.0;
  EXPECT_LT((project(outside, Cone::soc(3)) - expected).norm(), 1e-14);
}

TEST(Projection, PsdClipsNegativeEigenvalues) {
  MatrixXd X(2, 2);
  X << 1.0, 0.0, 0.0, -2.0;
  const VectorXd p = project(svec(X), Cone::psd(2));
  MatrixXd expected = MatrixXd::Zero(2, 2);
  expected(0, 0) = 1.0;
  EXPECT_LT((smat(p, 2) - expected).norm(), 1e-14);
}

TEST(Projection, MoreauDecompositionHolds) {
  std::mt19937_64 rng(11);
  const std::vector<Cone> cones = {Cone::zero(3), Cone::nonneg(4), Cone::soc(5), Cone::psd(4)};
  for (int trial = 0; trial < 20; ++trial) {
    for (const auto& cone : cones) {
      const VectorXd v = random_vector(cone.rows(), rng);
      const VectorXd pk = project(v, cone);
      // v = P_K(v) - P_K*(-v) with the two parts orthogonal.
      const VectorXd pd = project_dual(VectorXd(-v), cone);
      EXPECT_LT((v - (pk - pd)).norm(), 1e-10) << to_string(cone.type);
      EXPECT_NEAR(pk.dot(pd), 0.0, 1e-10) << to_string(cone.type);
      EXPECT_LT(cone_violation(pk, cone), 1e-12);
      // Idempotent.
      EXPECT_LT((project(pk, cone) - pk).norm(), 1e-10);
    }
  }
}

TEST(Projection, PsdResultIsPsd) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd X = random_symmetric(6, rng);
    const MatrixXd P = smat(project(svec(X), Cone::psd(6)), 6);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(P);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(ProblemIo, RoundTrip) {
  ProblemBuilder pb;
  const int x = pb.add_variables(2);
  const int r0 = pb.add_cone(Cone::nonneg(2));
  const int r1 = pb.add_cone(Cone::psd(2));
  pb.add(r0, x, -1.0);
  pb.add(r0, x, -0.5);  // duplicates are summed
  pb.add(r0 + 1, x + 1, 2.0);
  pb.add(r1 + 1, x, 0.25);
  pb.set_rhs(r0, -1.0);
  pb.set_objective(x + 1, 3.0);
  const ConicProblem p = pb.build();
  EXPECT_DOUBLE_EQ(p.A.coeff(0, 0), -1.5);
  std::stringstream ss;
  write_problem(ss, p);
  const ConicProblem q = read_problem(ss);
  EXPECT_EQ(q.cones, p.cones);
  EXPECT_EQ((MatrixXd(q.A) - MatrixXd(p.A)).norm(), 0.0);
  EXPECT_EQ((q.b - p.b).norm(), 0.0);
  EXPECT_EQ((q.c - p.c).norm(), 0.0);
}

TEST(ProblemBuilder, RejectsOutOfRangeEntries) {
  ProblemBuilder pb;
  pb.add_variables(1);
  pb.add_cone(Cone::nonneg(1));
  EXPECT_THROW(pb.add(1, 0, 1.0), std::out_of_range);
  EXPECT_THROW(pb.add(0, 1, 1.0), std::out_of_range);
}

TEST(Solver, ScalarLinearProgram) {
  // minimize x subject to x >= 1.
  ProblemBuilder pb;
  const int x = pb.add_variables(1);
  const int r = pb.add_cone(Cone::nonneg(1));
  pb.add(r, x, -1.0);
  pb.set_rhs(r, -1.0);
  pb.set_objective(x, 1.0);
  const auto res = solve(pb.build(), tight());
  ASSERT_EQ(res.status, SolveStatus::kOptimal);
  EXPECT_NEAR(res.x(0), 1.0, 1e-6);
  EXPECT_NEAR(res.y(0), 1.0, 1e-6);
}

TEST(Solver, PrimalInfeasibleCertificate) {
  // x >= 1 and x <= 0.
  ProblemBuilder pb;
  const int x = pb.add_variables(1);
  const int r = pb.add_cone(Cone::nonneg(2));
  pb.add(r, x, -1.0);
  pb.set_rhs(r, -1.0);
  pb.add(r + 1, x, 1.0);
  pb.set_objective(x, 1.0);
  const ConicProblem p = pb.build();
  const auto res = solve(p);
  ASSERT_EQ(res.status, SolveStatus::kPrimalInfeasible);
  const VectorXd& y = res.certificate;
  EXPECT_NEAR(p.b.dot(y), -1.0, 1e-12);
  EXPECT_GE(y.minCoeff(), 0.0);
  EXPECT_LE((SparseMatrix(p.A.transpose()) * y).lpNorm<Eigen::Infinity>(), 1e-7);
}

TEST(Solver, DualInfeasibleCertificate) {
  // minimize x subject to x <= 0 is unbounded below.
  ProblemBuilder pb;
  const int x = pb.add_variables(1);
  const int r = pb.add_cone(Cone::nonneg(1));
  pb.add(r, x, 1.0);
  pb.set_objective(x, 1.0);
  const ConicProblem p = pb.build();
  const auto res = solve(p);
  ASSERT_EQ(res.status, SolveStatus::kDualInfeasible);
  EXPECT_NEAR(p.c.dot(res.certificate), -1.0, 1e-12);
  EXPECT_LE((p.A * res.certificate + res.s).lpNorm<Eigen::Infinity>(), 1e-7);
}

TEST(Solver, SecondOrderConeOptimum) {
  // minimize x1 + x2 subject to ||(x1, x2)|| <= 1, optimum -sqrt(2).
  ProblemBuilder pb;
  const int x = pb.add_variables(2);
  const int r = pb.add_cone(Cone::soc(3));
  pb.set_rhs(r, 1.0);
  pb.add(r + 1, x, -1.0);
  pb.add(r + 2, x + 1, -1.0);
  pb.set_objective(x, 1.0);
  pb.set_objective(x + 1, 1.0);
  const auto res = solve(pb.build(), tight());
  ASSERT_EQ(res.status, SolveStatus::kOptimal);
  EXPECT_NEAR(res.objective, -std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(res.x(0), -1.0 / std::sqrt(2.0), 1e-6);
}

TEST(Solver, SmallestEigenvalueSdp) {
  // minimize Tr(diag(1, 3) X) subject to Tr X = 1, X psd; optimum 1.
  ProblemBuilder pb;
  const int x = pb.add_variables(3);  // svec of a 2 x 2 matrix
  const int r0 = pb.add_cone(Cone::zero(1));
  const int r1 = pb.add_cone(Cone::psd(2));
  pb.add(r0, x + svec_index(0, 0, 2), 1.0);
  pb.add(r0, x + svec_index(1, 1, 2), 1.0);
  pb.set_rhs(r0, 1.0);
  for (int i = 0; i < 3; ++i) pb.add(r1 + i, x + i, -1.0);
  pb.set_objective(x + svec_index(0, 0, 2), 1.0);
  pb.set_objective(x + svec_index(1, 1, 2), 3.0);
  const auto res = solve(pb.build(), tight());
  ASSERT_EQ(res.status, SolveStatus::kOptimal);
  EXPECT_NEAR(res.objective, 1.0, 1e-6);
  const MatrixXd X = smat(res.x, 2);
  EXPECT_NEAR(X(0, 0), 1.0, 1e-5);
  EXPECT_NEAR(X(1, 1), 0.0, 1e-5);
}

class PlantedOptimum : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(PlantedOptimum, MixedConesReachKnownOptimum) {
  const std::vector<Cone> cones = {Cone::zero(4), Cone::nonneg(12), Cone::soc(5), Cone::soc(3),
                                   Cone::psd(4)};
  const auto pp = planted(cones, 15, 0.3, 0, GetParam());
  const auto res = solve(pp.problem, tight());
  ASSERT_EQ(res.status, SolveStatus::kOptimal);
  EXPECT_NEAR(res.objective, pp.optimum, 1e-5 * (1.0 + std::abs(pp.optimum)));
  const auto kkt = kkt_residuals(pp.problem, res.x, res.y, res.s);
  EXPECT_LT(kkt.primal_cone, 1e-10);
  EXPECT_LT(kkt.dual_cone, 1e-10);
}

TEST_P(PlantedOptimum, ScalingDoesNotChangeTheAnswer) {
  const std::vector<Cone> cones = {Cone::nonneg(10), Cone::soc(4), Cone::psd(3)};
  const auto pp = planted(cones, 10, 0.4, 0, GetParam() + 100);
  SolverSettings on = tight();
  SolverSettings off = tight();
  off.scaling = false;
  const auto a = solve(pp.problem, on);
  const auto b = solve(pp.problem, off);
  ASSERT_EQ(a.status, SolveStatus::kOptimal);
  ASSERT_EQ(b.status, SolveStatus::kOptimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-5 * (1.0 + std::abs(a.objective)));
}

TEST_P(PlantedOptimum, AccelerationDoesNotChangeTheAnswer) {
  const std::vector<Cone> cones = {Cone::zero(2), Cone::nonneg(8), Cone::psd(3)};
  const auto pp = planted(cones, 9, 0.4, 0, GetParam() + 200);
  SolverSettings plain = tight();
  plain.acceleration_memory = 0;
  const auto a = solve(pp.problem, tight());
  const auto b = solve(pp.problem, plain);
  ASSERT_EQ(a.status, SolveStatus::kOptimal);
  ASSERT_EQ(b.status, SolveStatus::kOptimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-5 * (1.0 + std::abs(a.objective)));
}

INSTANTIATE_TEST_SUITE_P(Seeds, PlantedOptimum, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(Solver, LargeProblemWithDenseRowsUsesSplitFactorization) {
  // n > 600 with a few fully dense rows exercises the sparse factor plus
  // low-rank correction.
  std::vector<Cone> cones = {Cone::nonneg(900), Cone::psd(8)};
  const auto pp = planted(cones, 700, 0.004, 3, 42);
  const auto res = solve(pp.problem, tight());
  ASSERT_EQ(res.status, SolveStatus::kOptimal);
  EXPECT_NEAR(res.objective, pp.optimum, 1e-5 * (1.0 + std::abs(pp.optimum)));
}

TEST(Solver, TimeLimitStopsEarly) {
  const std::vector<Cone> cones = {Cone::nonneg(30), Cone::psd(6)};
  const auto pp = planted(cones, 40, 0.3, 0, 9);
  SolverSettings st = tight();
  st.eps_abs = st.eps_rel = 1e-300;
  st.time_limit_s = 0.05;
  const auto res = solve(pp.problem, st);
  EXPECT_EQ(res.status, SolveStatus::kMaxIters);
  EXPECT_TRUE(res.timed_out);
}

TEST(Solver, DeterministicForIdenticalInput) {
  const std::vector<Cone> cones = {Cone::nonneg(10), Cone::soc(4)};
  const auto pp = planted(cones, 8, 0.5, 0, 77);
  const auto a = solve(pp.problem);
  const auto b = solve(pp.problem);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ((a.x - b.x).norm(), 0.0);
}

TEST(Projection, SecondOrderHalfwayCase) {
  VectorXd v(3);
  v << 0.0, 1.0, 0.0;
  VectorXd expected(3);
  expected << 0.5, 0.5, 0.0;
  EXPECT_LT((project(v, Cone::soc(3)) - expected).norm(), 1e-15);
}

namespace {

SolverSettings interior() {
  SolverSettings st = tight();
  st.method = SolverMethod::kInteriorPoint;
  return st;
}

}  // namespace

TEST(SolverMethodNames, RoundTrip) {
  for (auto m : {SolverMethod::kSplitting, SolverMethod::kInteriorPoint}) {
    EXPECT_EQ(parse_solver_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_solver_method("simplex"), std::invalid_argument);
}

class InteriorPlanted : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(InteriorPlanted, MixedConesReachKnownOptimum) {
  const std::vector<Cone> cones = {Cone::zero(4), Cone::nonneg(12), Cone::soc(5), Cone::soc(3),
                                   Cone::psd(4)};
  const auto pp = planted(cones, 15, 0.3, 0, GetParam());
  const auto res = solve(pp.problem, interior());
  ASSERT_EQ(res.status, SolveStatus::kOptimal);
  EXPECT_NEAR(res.objective, pp.optimum, 1e-6 * (1.0 + std::abs(pp.optimum)));
  const auto kkt = kkt_residuals(pp.problem, res.x, res.y, res.s);
  EXPECT_LT(kkt.primal_cone, 1e-10);
  EXPECT_LT(kkt.dual_cone, 1e-10);
}

TEST_P(InteriorPlanted, AgreesWithSplitting) {
  const std::vector<Cone> cones = {Cone::nonneg(10), Cone::soc(4), Cone::psd(3)};
  const auto pp = planted(cones, 10, 0.4, 0, GetParam() + 300);
  const auto a = solve(pp.problem, interior());
  const auto b = solve(pp.problem, tight());
  ASSERT_EQ(a.status, SolveStatus::kOptimal);
  ASSERT_EQ(b.status, SolveStatus::kOptimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-5 * (1.0 + std::abs(a.objective)));
}

INSTANTIATE_TEST_SUITE_P(Seeds, InteriorPlanted, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(InteriorPoint, SmallestEigenvalueSdp) {
  ProblemBuilder pb;
  const int x = pb.add_variables(3);
  const int r0 = pb.add_cone(Cone::zero(1));
  const int r1 = pb.add_cone(Cone::psd(2));
  pb.add(r0, x + svec_index(0, 0, 2), 1.0);
  pb.add(r0, x + svec_index(1, 1, 2), 1.0);
  pb.set_rhs(r0, 1.0);
  for (int i = 0; i < 3; ++i) pb.add(r1 + i, x + i, -1.0);
  pb.set_objective(x + svec_index(0, 0, 2), 1.0);
  pb.set_objective(x + svec_index(1, 1, 2), 3.0);
  const auto res = solve(pb.build(), interior());
  ASSERT_EQ(res.status, SolveStatus::kOptimal);
  EXPECT_NEAR(res.objective, 1.0, 1e-7);
  EXPECT_LT(res.iterations, 40);
}

TEST(InteriorPoint, PrimalInfeasibleCertificate) {
  ProblemBuilder pb;
  const int x = pb.add_variables(1);
  const int r = pb.add_cone(Cone::nonneg(2));
  pb.add(r, x, -1.0);
  pb.set_rhs(r, -1.0);
  pb.add(r + 1, x, 1.0);
  pb.set_objective(x, 1.0);
  const ConicProblem p = pb.build();
  const auto res = solve(p, interior());
  ASSERT_EQ(res.status, SolveStatus::kPrimalInfeasible);
  const VectorXd& y = res.certificate;
  EXPECT_NEAR(p.b.dot(y), -1.0, 1e-12);
  EXPECT_GE(y.minCoeff(), 0.0);
  EXPECT_LE((SparseMatrix(p.A.transpose()) * y).lpNorm<Eigen::Infinity>(), 1e-7);
}

TEST(InteriorPoint, DualInfeasibleCertificate) {
  ProblemBuilder pb;
  const int x = pb.add_variables(1);
  const int r = pb.add_cone(Cone::nonneg(1));
  pb.add(r, x, 1.0);
  pb.set_objective(x, 1.0);
  const ConicProblem p = pb.build();
  const auto res = solve(p, interior());
  ASSERT_EQ(res.status, SolveStatus::kDualInfeasible);
  EXPECT_NEAR(p.c.dot(res.certificate), -1.0, 1e-12);
  EXPECT_LE((p.A * res.certificate + res.s).lpNorm<Eigen::Infinity>(), 1e-7);
}

TEST(InteriorPoint, InfeasiblePsdProblem) {
  // X psd with X00 = -1 has no solution.
  ProblemBuilder pb;
  const int x = pb.add_variables(3);
  const int r0 = pb.add_cone(Cone::zero(1));
  const int r1 = pb.add_cone(Cone::psd(2));
  pb.add(r0, x, 1.0);
  pb.set_rhs(r0, -1.0);
  for (int i = 0; i < 3; ++i) pb.add(r1 + i, x + i, -1.0);
  const ConicProblem p = pb.build();
  const auto res = solve(p, interior());
  ASSERT_EQ(res.status, SolveStatus::kPrimalInfeasible);
  EXPECT_LT(p.b.dot(res.certificate), 0.0);
  const VectorXd y_psd = res.certificate.segment(r1, 3);
  EXPECT_LT(cone_violation(y_psd, Cone::psd(2)), 1e-9);
}

TEST(InteriorPoint, DeterministicForIdenticalInput) {
  const std::vector<Cone> cones = {Cone::nonneg(10), Cone::soc(4), Cone::psd(3)};
  const auto pp = planted(cones, 8, 0.5, 0, 78);
  const auto a = solve(pp.problem, interior());
  const auto b = solve(pp.problem, interior());
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ((a.x - b.x).norm(), 0.0);
}

TEST(Status, HasSolution) {
  EXPECT_TRUE(has_solution(SolveStatus::kOptimal));
  EXPECT_TRUE(has_solution(SolveStatus::kOptimalInaccurate));
  EXPECT_FALSE(has_solution(SolveStatus::kPrimalInfeasible));
  EXPECT_FALSE(has_solution(SolveStatus::kMaxIters));
}
