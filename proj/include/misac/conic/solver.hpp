#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>

#include "misac/conic/problem.hpp"

namespace misac::conic {

enum class SolveStatus {
  kOptimal,
  /// Stopped before reaching eps_abs / eps_rel, but the best iterate meets
  /// the reduced tolerance eps_reduced (interior-point back end only).
  kOptimalInaccurate,
  kPrimalInfeasible,
  kDualInfeasible,
  kMaxIters,
};

/// kOptimal or kOptimalInaccurate.
inline bool has_solution(SolveStatus s) {
  return s == SolveStatus::kOptimal || s == SolveStatus::kOptimalInaccurate;
}

std::string to_string(SolveStatus s);

enum class SolverMethod { kSplitting, kInteriorPoint };

std::string to_string(SolverMethod m);
/// Accepts "splitting" and "interior_point"; throws std::invalid_argument otherwise.
SolverMethod parse_solver_method(const std::string& name);

struct SolverSettings {
  /// Back end used by the free solve().
  SolverMethod method = SolverMethod::kSplitting;
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  /// Absolute and relative tolerance for kOptimalInaccurate.
  double eps_reduced = 1e-4;
  /// Tolerance on the normalized infeasibility certificates.
  double eps_infeas = 1e-7;
  int max_iters = 100000;
  /// Iteration cap for the interior-point back end, which needs few but
  /// expensive iterations.
  int interior_max_iters = 150;
  /// Ruiz equilibration of A (cone-aware) followed by b/c normalization.
  bool scaling = true;
  int scaling_passes = 25;
  /// Relative weight of b and c after normalization.
  double scale = 1.0;
  /// Proximal weight on the x block of the linear system.
  double rho_x = 1e-3;
  /// Over-relaxation parameter in (0, 2).
  double alpha = 1.5;
  /// Anderson acceleration memory; 0 disables it.
  int acceleration_memory = 10;
  int check_interval = 10;
  /// Wall-clock budget in seconds; <= 0 disables it.
  double time_limit_s = 0.0;
  bool verbose = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kMaxIters;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd s;
  double objective = 0.0;       // c^T x
  double dual_objective = 0.0;  // -b^T y
  double primal_residual = 0.0; // ||A x + s - b||_inf
  double dual_residual = 0.0;   // ||A^T y + c||_inf
  double gap = 0.0;             // |c^T x + b^T y|
  int iterations = 0;
  double runtime_s = 0.0;
  bool timed_out = false;
  /// kPrimalInfeasible: y in K* with b^T y = -1 and ||A^T y||_inf <= eps_infeas.
  /// kDualInfeasible:   x with c^T x = -1 and ||A x + s||_inf <= eps_infeas for
  ///                    the s in K stored in `s`.
  Eigen::VectorXd certificate;
};

/// Interface for interchangeable conic back ends (differential testing).
class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual SolveResult solve(const ConicProblem& problem, const SolverSettings& settings) const = 0;
  virtual std::string name() const = 0;
};

/// Douglas-Rachford splitting on the homogeneous self-dual embedding.
///
/// Each iteration solves one linear system with the cached factorization of
/// (rho_x I + A^T A) and projects onto the cone product. Rows of A with many
/// nonzeros are split off and handled by a Woodbury correction so that the
/// sparse factor stays sparse. Deterministic for identical inputs.
class SplittingSolver final : public ConicSolver {
 public:
  SolveResult solve(const ConicProblem& problem, const SolverSettings& settings) const override;
  std::string name() const override { return "splitting"; }
};

/// Primal-dual interior-point method on the homogeneous self-dual embedding
/// with Nesterov-Todd scaling and Mehrotra correction.
///
/// Zero-cone rows are kept as equality constraints. The reduced normal
/// matrix is dense; variables that touch a single cone block and no equality
/// row are eliminated block by block before factorizing, so epigraph
/// variables of small cones cost almost nothing. Suited to problems with a
/// few thousand variables at most.
class InteriorPointSolver final : public ConicSolver {
 public:
  SolveResult solve(const ConicProblem& problem, const SolverSettings& settings) const override;
  std::string name() const override { return "interior_point"; }
};

/// Solves with the back end named in the settings.
SolveResult solve(const ConicProblem& problem, const SolverSettings& settings = {});

/// Residuals of a candidate (x, y, s) on the unscaled problem.
struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double primal_cone = 0.0;  // distance of s from K
  double dual_cone = 0.0;    // distance of y from K*
};

KktResiduals kkt_residuals(const ConicProblem& p, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& s);

}  // namespace misac::conic
