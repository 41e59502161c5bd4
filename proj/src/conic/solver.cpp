#include "misac/conic/solver.hpp"
#include "equilibrate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

namespace misac::conic {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kOptimalInaccurate: return "optimal_inaccurate";
    case SolveStatus::kPrimalInfeasible: return "primal_infeasible";
    case SolveStatus::kDualInfeasible: return "dual_infeasible";
    case SolveStatus::kMaxIters: return "max_iters";
  }
  return "?";
}

std::string to_string(SolverMethod m) {
  return m == SolverMethod::kInteriorPoint ? "interior_point" : "splitting";
}

SolverMethod parse_solver_method(const std::string& name) {
  if (name == "splitting") return SolverMethod::kSplitting;
  if (name == "interior_point") return SolverMethod::kInteriorPoint;
  throw std::invalid_argument("unknown solver method: " + name);
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using detail::Equilibration;
using detail::equilibrate;

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Solves (rho I + A^T A) z = r. Rows of A with many nonzeros would fill the
// sparse factor, so they are kept out of it and added back with the
// Woodbury identity.
class NormalSolver {
 public:
  NormalSolver(const SparseMatrix& A, double rho) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    std::vector<int> row_nnz(m, 0);
    for (int j = 0; j < n; ++j) {
      for (SparseMatrix::InnerIterator it(A, j); it; ++it) ++row_nnz[it.row()];
    }
    const int threshold = std::max(40, n / 10);
    std::vector<int> dense_index(m, -1);
    int k = 0;
    for (int i = 0; i < m; ++i) {
      if (row_nnz[i] > threshold) dense_index[i] = k++;
    }

    if (n <= 600 || 2 * k >= n) {
      dense_mode_ = true;
      const SparseMatrix AtA = SparseMatrix(A.transpose()) * A;
      MatrixXd M = MatrixXd(AtA);
      M.diagonal().array() += rho;
      dense_.compute(M);
      if (dense_.info() != Eigen::Success) throw std::runtime_error("normal system factorization failed");
      return;
    }

    std::vector<Eigen::Triplet<double>> sparse_part;
    std::vector<Eigen::Triplet<double>> dense_part;
    for (int j = 0; j < n; ++j) {
      for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
        const int di = dense_index[it.row()];
        if (di < 0) sparse_part.emplace_back(static_cast<int>(it.row()), j, it.value());
        else dense_part.emplace_back(di, j, it.value());
      }
    }
    SparseMatrix As(m, n);
    As.setFromTriplets(sparse_part.begin(), sparse_part.end());
    SparseMatrix Ms = SparseMatrix(As.transpose()) * As;
    SparseMatrix eye(n, n);
    eye.setIdentity();
    Ms += rho * eye;
    sparse_.compute(Ms);
    if (sparse_.info() != Eigen::Success) throw std::runtime_error("normal system factorization failed");

    if (k > 0) {
      Ad_.resize(k, n);
      Ad_.setFromTriplets(dense_part.begin(), dense_part.end());
      const MatrixXd AdT = MatrixXd(SparseMatrix(Ad_.transpose()));
      Y_ = sparse_.solve(AdT);
      MatrixXd C = Ad_ * Y_;
      C.diagonal().array() += 1.0;
      capacitance_.compute(C);
      if (capacitance_.info() != Eigen::Success) throw std::runtime_error("normal system factorization failed");
    }
  }

  VectorXd solve(const VectorXd& r) const {
    if (dense_mode_) return dense_.solve(r);
    VectorXd z = sparse_.solve(r);
    if (Y_.cols() > 0) {
      const VectorXd w = Ad_ * z;
      z.noalias() -= Y_ * capacitance_.solve(w);
    }
    return z;
  }

 private:
  bool dense_mode_ = false;
  Eigen::LLT<MatrixXd> dense_;
  Eigen::SimplicialLLT<SparseMatrix> sparse_;
  SparseMatrix Ad_;
  MatrixXd Y_;
  Eigen::LLT<MatrixXd> capacitance_;
};

void project_dual_product(Eigen::Ref<VectorXd> y, const std::vector<Cone>& cones) {
  int row = 0;
  for (const auto& cone : cones) {
    const int r = cone.rows();
    project_dual_cone(y.segment(row, r), cone);
    row += r;
  }
}

// Type-II Anderson acceleration on the fixed-point map z -> F(z).
class Anderson {
 public:
  Anderson(int dim, int memory) : memory_(memory), dS_(dim, memory), dF_(dim, memory) {}

  void reset() {
    count_ = 0;
    next_ = 0;
    have_prev_ = false;
  }

  // Returns false if no extrapolated point is available yet.
  bool step(const VectorXd& z, const VectorXd& f, VectorXd& out) {
    const VectorXd g = f - z;
    if (have_prev_) {
      const int col = next_;
      dS_.col(col) = g - g_prev_;
      dF_.col(col) = f - f_prev_;
      next_ = (next_ + 1) % memory_;
      count_ = std::min(count_ + 1, memory_);
    }
    g_prev_ = g;
    f_prev_ = f;
    have_prev_ = true;
    if (count_ == 0) return false;

    const auto S = dS_.leftCols(count_);
    const auto Fm = dF_.leftCols(count_);
    MatrixXd G = S.transpose() * S;
    const double reg = 1e-10 * std::max(G.trace(), 1e-300);
    G.diagonal().array() += reg;
    const VectorXd rhs = S.transpose() * g;
    const VectorXd gamma = G.ldlt().solve(rhs);
    if (!gamma.allFinite() || gamma.lpNorm<Eigen::Infinity>() > 1e8) {
      reset();
      return false;
    }
    out = f - Fm * gamma;
    return out.allFinite();
  }

 private:
  int memory_;
  int count_ = 0;
  int next_ = 0;
  bool have_prev_ = false;
  MatrixXd dS_;
  MatrixXd dF_;
  VectorXd g_prev_;
  VectorXd f_prev_;
};

}  // namespace

KktResiduals kkt_residuals(const ConicProblem& p, const VectorXd& x, const VectorXd& y,
                           const VectorXd& s) {
  KktResiduals r;
  r.primal = inf_norm(p.A * x + s - p.b);
  r.dual = inf_norm(SparseMatrix(p.A.transpose()) * y + p.c);
  r.gap = std::abs(p.c.dot(x) + p.b.dot(y));
  int row = 0;
  for (const auto& cone : p.cones) {
    const int rows = cone.rows();
    r.primal_cone = std::max(r.primal_cone, cone_violation(s.segment(row, rows), cone));
    const VectorXd ys = y.segment(row, rows);
    r.dual_cone = std::max(r.dual_cone, inf_norm(ys - project_dual(ys, cone)));
    row += rows;
  }
  return r;
}

SolveResult SplittingSolver::solve(const ConicProblem& problem, const SolverSettings& st) const {
  problem.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const int n = problem.num_vars();
  const int m = problem.num_rows();
  if (n == 0 || m == 0) throw std::invalid_argument("solve: empty problem");

  SparseMatrix A = problem.A;
  A.makeCompressed();
  VectorXd b = problem.b;
  VectorXd c = problem.c;
  const Equilibration eq = equilibrate(A, b, c, problem.cones, st);
  const SparseMatrix At = A.transpose();
  const SparseMatrix At_orig = problem.A.transpose();

  const NormalSolver normal(A, st.rho_x);
  // (R + Q)^{-1} reduces to M^{-1} applied to (r_x, r_y) plus a rank-one
  // correction along p = M^{-1} (c, b).
  const auto apply_m_inverse = [&](const VectorXd& r1, const VectorXd& r2, VectorXd& zx,
                                   VectorXd& zy) {
    zx = normal.solve(r1 - At * r2);
    zy = r2 + A * zx;
  };
  VectorXd px, py;
  apply_m_inverse(c, b, px, py);
  const double denom = 1.0 + c.dot(px) + b.dot(py);

  // State z = (u_x, u_y, u_tau, v_s, v_kappa); v_x stays zero.
  const int l = n + m + 1;
  const int dim = n + 2 * m + 2;
  VectorXd z = VectorXd::Zero(dim);
  z(n + m) = std::sqrt(static_cast<double>(l));
  z(dim - 1) = std::sqrt(static_cast<double>(l));

  VectorXd zx, zy, ux_t, uy_t;
  const auto dr_step = [&](const VectorXd& cur, VectorXd& out) {
    const auto ux = cur.segment(0, n);
    const auto uy = cur.segment(n, m);
    const double ut = cur(n + m);
    const auto vs = cur.segment(n + m + 1, m);
    const double vk = cur(dim - 1);

    const VectorXd r1 = st.rho_x * ux;
    const VectorXd r2 = uy + vs;
    const double rt = ut + vk;
    apply_m_inverse(r1, r2, zx, zy);
    const double tau = (rt + c.dot(zx) + b.dot(zy)) / denom;
    ux_t = zx - tau * px;
    uy_t = zy - tau * py;

    const double a = st.alpha;
    out.resize(dim);
    auto nx = out.segment(0, n);
    auto ny = out.segment(n, m);
    auto ns = out.segment(n + m + 1, m);
    nx = a * ux_t + (1.0 - a) * ux;
    const VectorXd ry = a * uy_t + (1.0 - a) * uy;
    const double rtau = a * tau + (1.0 - a) * ut;
    ny = ry - vs;
    project_dual_product(ny, problem.cones);
    out(n + m) = std::max(0.0, rtau - vk);
    ns = vs + ny - ry;
    out(dim - 1) = vk + out(n + m) - rtau;
  };

  SolveResult res;
  VectorXd f(dim);
  VectorXd z_plain;
  double g_norm_plain = std::numeric_limits<double>::infinity();
  bool extrapolated = false;
  const bool accelerate = st.acceleration_memory > 0;
  Anderson aa(dim, std::max(1, st.acceleration_memory));

  VectorXd x, y, s;
  const auto unscale = [&](const VectorXd& state, double t) {
    x = eq.E.cwiseProduct(state.segment(0, n)) / (t * eq.b_scale);
    y = eq.D.cwiseProduct(state.segment(n, m)) / (t * eq.c_scale);
    s = state.segment(n + m + 1, m).cwiseQuotient(eq.D) / (t * eq.b_scale);
  };

  const double b_norm = inf_norm(problem.b);
  const double c_norm = inf_norm(problem.c);

  int iter = 0;
  for (; iter < st.max_iters; ++iter) {
    dr_step(z, f);
    double g_norm = (f - z).norm();
    if (extrapolated && g_norm > g_norm_plain) {
      // The extrapolated point made things worse: fall back to the plain iterate.
      z = z_plain;
      dr_step(z, f);
      g_norm = (f - z).norm();
      aa.reset();
    }
    if (!f.allFinite()) throw std::runtime_error("solve: iterate diverged");

    const bool last = iter + 1 == st.max_iters;
    if ((iter + 1) % st.check_interval == 0 || last) {
      const double tau = f(n + m);
      const double kappa = f(dim - 1);
      if (tau > 1e-12 * std::max(1.0, kappa)) {
        unscale(f, tau);
        const VectorXd Ax = problem.A * x;
        const VectorXd Aty = At_orig * y;
        const double cx = problem.c.dot(x);
        const double by = problem.b.dot(y);
        res.primal_residual = inf_norm(Ax + s - problem.b);
        res.dual_residual = inf_norm(Aty + problem.c);
        res.gap = std::abs(cx + by);
        res.objective = cx;
        res.dual_objective = -by;
        const bool p_ok = res.primal_residual <=
                          st.eps_abs + st.eps_rel * std::max({inf_norm(Ax), inf_norm(s), b_norm});
        const bool d_ok =
            res.dual_residual <= st.eps_abs + st.eps_rel * std::max(inf_norm(Aty), c_norm);
        const bool g_ok = res.gap <= st.eps_abs + st.eps_rel * std::max(std::abs(cx), std::abs(by));
        if (p_ok && d_ok && g_ok) {
          res.status = SolveStatus::kOptimal;
          break;
        }
      }

      // Infeasibility certificates from the unnormalized directions.
      const VectorXd yd = eq.D.cwiseProduct(f.segment(n, m));
      const double byd = problem.b.dot(yd);
      if (byd < 0.0) {
        const VectorXd cert = yd / -byd;
        if (inf_norm(At_orig * cert) <= st.eps_infeas) {
          res.status = SolveStatus::kPrimalInfeasible;
          res.certificate = cert;
          break;
        }
      }
      const VectorXd xd = eq.E.cwiseProduct(f.segment(0, n));
      const double cxd = problem.c.dot(xd);
      if (cxd < 0.0) {
        const VectorXd xc = xd / -cxd;
        const VectorXd sc = f.segment(n + m + 1, m).cwiseQuotient(eq.D) / -cxd;
        if (inf_norm(problem.A * xc + sc) <= st.eps_infeas) {
          res.status = SolveStatus::kDualInfeasible;
          res.certificate = xc;
          res.s = sc;
          break;
        }
      }

      if (st.verbose) {
        std::cerr << "iter " << iter + 1 << " pres " << res.primal_residual << " dres "
                  << res.dual_residual << " gap " << res.gap << " tau " << tau << " kappa "
                  << kappa << "\n";
      }
      if (st.time_limit_s > 0.0 && elapsed() > st.time_limit_s) {
        res.timed_out = true;
        break;
      }
    }

    extrapolated = false;
    if (accelerate) {
      VectorXd z_next;
      if (aa.step(z, f, z_next)) {
        z_plain = f;
        g_norm_plain = g_norm;
        z = std::move(z_next);
        extrapolated = true;
        continue;
      }
    }
    z = f;
  }

  res.iterations = std::min(iter + 1, st.max_iters);
  if (res.status == SolveStatus::kOptimal) {
    res.x = x;
    res.y = y;
    res.s = s;
  } else if (res.status == SolveStatus::kMaxIters) {
    const double tau = f(n + m);
    if (tau > 0.0) {
      unscale(f, tau);
      res.x = x;
      res.y = y;
      res.s = s;
    } else {
      res.x = VectorXd::Zero(n);
      res.y = VectorXd::Zero(m);
      res.s = VectorXd::Zero(m);
    }
    res.objective = problem.c.dot(res.x);
    res.dual_objective = -problem.b.dot(res.y);
  } else {
    res.x = VectorXd::Zero(n);
    res.y = VectorXd::Zero(m);
    if (res.s.size() != m) res.s = VectorXd::Zero(m);
    res.objective = res.status == SolveStatus::kPrimalInfeasible
                        ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity();
  }
  res.runtime_s = elapsed();
  return res;
}

SolveResult solve(const ConicProblem& problem, const SolverSettings& settings) {
  if (settings.method == SolverMethod::kInteriorPoint) return InteriorPointSolver{}.solve(problem, settings);
  return SplittingSolver{}.solve(problem, settings);
}

}  // namespace misac::conic
