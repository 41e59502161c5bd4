#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "misac/beampattern.hpp"
#include "misac/config.hpp"
#include "misac/conic/problem.hpp"
#include "misac/conic/solver.hpp"
#include "misac/design.hpp"
#include "misac/metrics.hpp"
#include "misac/types.hpp"

namespace misac {

/// Column layout of the transmit subproblem.
struct TransmitMap {
  int dim = 0;               // n, the stacked dimension; W_k is n x n
  int z = 0;                 // first Hermitian coordinate of Z = sum_k W_k
  std::vector<int> w;        // first Hermitian coordinate of W_k, k < K - 1
  std::vector<int> zeta;     // per block, empty in feasibility mode
  std::vector<int> t;        // first epigraph variable per block; grid_size each
  int grid_size = 0;
};

struct TransmitSubproblem {
  conic::ConicProblem problem;
  TransmitMap map;
};

/// Transmit block of the relaxed problem for a fixed receive covariance V.
///
/// Each mismatch term |zeta_m P_m(phi_i) - a^H Z D_m a| becomes a
/// three-dimensional second-order cone on (t, real part, imaginary part).
/// The variables are the Hermitian coordinates of Z and of W_1 .. W_{K-1};
/// W_K = Z - sum_{k<K} W_k, so there are no equality rows and the pattern
/// rows only touch Z. Every beam gets a PSD cone on its real embedding. With
/// `feasibility_only` the objective and all pattern variables are dropped
/// and only C1, C3, C4, C5 and the PSD cones remain.
TransmitSubproblem build_transmit_subproblem(const DesignInstance& d, const MatrixXc& V,
                                             const AngularGrid& grid,
                                             bool feasibility_only = false);

struct TransmitBlock {
  std::vector<MatrixXc> W;
  std::vector<double> zeta;
};

TransmitBlock read_transmit_solution(const TransmitMap& map, const VectorXd& x);

/// Column layout of the receive subproblem.
struct ReceiveMap {
  int dim = 0;   // N
  int v = 0;     // first Hermitian coordinate of V
  int zeta = -1;
  int t = -1;    // grid_size epigraph variables
  int grid_size = 0;
};

struct ReceiveSubproblem {
  conic::ConicProblem problem;
  ReceiveMap map;
};

/// Receive block for a fixed transmit covariance Z: mismatch terms are real
/// and become a pair of linear inequalities each, one small cone per grid
/// point; Tr V = 1 is an equality row.
ReceiveSubproblem build_receive_subproblem(const DesignInstance& d, const MatrixXc& Z,
                                           const AngularGrid& grid);

struct ReceiveBlock {
  MatrixXc V;
  double zeta = 0.0;
};

ReceiveBlock read_receive_solution(const ReceiveMap& map, const VectorXd& x);

/// Principal eigenvector scaled by sqrt(lambda_1), with the first entry of
/// non-negligible magnitude made real and non-negative.
struct RankOne {
  VectorXc vector;
  double ratio = 0.0;  // lambda_2 / lambda_1
  bool zero = false;   // X had no positive eigenvalue
};

RankOne extract_rank_one(const MatrixXc& X);

/// Combined objective sum_m C_m + E recomputed from the matrices.
double design_objective(const DesignInstance& d, const std::vector<MatrixXc>& W,
                        const std::vector<double>& zeta_tx, const MatrixXc& V, double zeta_rx,
                        const AngularGrid& grid);

struct AoOptions {
  double tolerance = 1e-3;  // relative objective decrease
  int max_rounds = 20;
  double rank_tight = 1e-3;
  double feasibility_rel_tol = 1e-3;
  double time_limit_s = 0.0;  // whole run, <= 0 disables
  conic::SolverSettings solver;
};

AoOptions ao_options(const SystemConfig& config);

enum class DesignStatus {
  kSolved,      // every accepted block came from an optimal (possibly reduced-accuracy) solve
  kInfeasible,  // first transmit subproblem certified infeasible
  kDegraded,    // some solve stopped at its iteration limit
  kTimeout,
};

std::string to_string(DesignStatus s);

struct BeamformingSolution {
  DesignStatus status = DesignStatus::kInfeasible;
  std::vector<MatrixXc> W;
  MatrixXc V;
  std::vector<double> zeta_tx;
  double zeta_rx = 0.0;

  std::vector<VectorXc> w;
  VectorXc v;
  std::vector<double> rank_ratio_w;
  double rank_ratio_v = 0.0;
  bool tight = false;

  /// Combined objective after each completed round.
  std::vector<double> objective_trace;
  /// Sum of the epigraph objectives reported by the solver for the accepted blocks.
  double solver_objective = 0.0;
  /// Same quantity recomputed from W, V and zeta.
  double objective = 0.0;
  std::vector<std::string> solve_statuses;
  int rounds = 0;
  int solver_iterations = 0;
  double runtime_s = 0.0;
  QosReport qos;

  bool usable() const { return status == DesignStatus::kSolved || status == DesignStatus::kDegraded; }
};

/// Receive covariance used before the first receive solve: the normalized
/// matched filter towards the receiver's pattern center.
MatrixXc initial_receive_covariance(const DesignInstance& d);

/// Alternating optimization, transmit block first. A new block is accepted
/// only if the recomputed combined objective does not increase, so the
/// recorded trace is monotone by construction.
BeamformingSolution alternating_optimize(const DesignInstance& d, const AoOptions& options);

/// Outcome of the first transmit subproblem under the initial receive beam,
/// solved as a pure feasibility problem.
conic::SolveStatus first_round_feasibility(const DesignInstance& d, const AoOptions& options);

/// Worst relative violation of C1, C3, C4 and C5 by the covariances W under
/// a fixed V, after each W_k is clipped to its PSD part. 0 when all hold.
double covariance_violation(const DesignInstance& d, const std::vector<MatrixXc>& W, const MatrixXc& V);

/// Relaxation of the first transmit block restricted to the blocks that the
/// echo or a front-end term touches: users and beam-steered interference are
/// dropped (both only shrink the feasible set). Empty optional when there is
/// no front-end term to screen with.
std::optional<DesignInstance> front_end_relaxation(const DesignInstance& d);

struct FirstRound {
  conic::SolveStatus status = conic::SolveStatus::kMaxIters;
  bool screened = false;   // certified infeasible by front_end_relaxation
  bool verified = false;   // the returned point passes covariance_violation
  double violation = 0.0;
};

/// Infeasibility verdict used for counting: screen, solve, then check the
/// returned point against the feasibility tolerance.
FirstRound first_round_check(const DesignInstance& d, const AoOptions& options);

nlohmann::json to_json(const BeamformingSolution& s);

}  // namespace misac
