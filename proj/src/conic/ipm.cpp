#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "misac/conic/solver.hpp"
#include "equilibrate.hpp"

namespace misac::conic {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// One non-zero cone of the inequality part G x + s = h.
struct Block {
  ConeType type = ConeType::kNonneg;
  int offset = 0;
  int rows = 0;
  int side = 0;

  std::vector<int> priv;    // columns that appear in this block only
  std::vector<int> shared;  // positions in the shared column list
  MatrixXd G;               // rows x (priv, shared)

  // Nesterov-Todd scaling
  VectorXd w;               // nonneg: W = diag(w)
  MatrixXd W, Winv;         // second-order cone, both symmetric
  MatrixXd R, Rinv;         // PSD: W(U) = R^T U R
  VectorXd lambda;

  Eigen::LLT<MatrixXd> D;   // private part of the normal matrix
  MatrixXd C;               // shared x private coupling
};

enum class Op { kW, kWt, kWinv, kWinvt };

VectorXd apply(const Block& b, Op op, const VectorXd& v) {
  const bool fwd = op == Op::kW || op == Op::kWt;
  switch (b.type) {
    case ConeType::kNonneg:
      return fwd ? VectorXd(v.cwiseProduct(b.w)) : VectorXd(v.cwiseQuotient(b.w));
    case ConeType::kSecondOrder:
      return fwd ? VectorXd(b.W * v) : VectorXd(b.Winv * v);
    case ConeType::kPsd: {
      const MatrixXd U = smat(v, b.side);
      switch (op) {
        case Op::kW: return svec(b.R.transpose() * U * b.R);
        case Op::kWt: return svec(b.R * U * b.R.transpose());
        case Op::kWinv: return svec(b.Rinv.transpose() * U * b.Rinv);
        case Op::kWinvt: return svec(b.Rinv * U * b.Rinv.transpose());
      }
      break;
    }
    case ConeType::kZero: break;
  }
  throw std::logic_error("interior point: bad cone");
}

// Jordan product of the cone algebra.
VectorXd circ(const Block& b, const VectorXd& x, const VectorXd& y) {
  switch (b.type) {
    case ConeType::kNonneg: return x.cwiseProduct(y);
    case ConeType::kSecondOrder: {
      VectorXd r(x.size());
      r(0) = x.dot(y);
      r.tail(x.size() - 1) = x(0) * y.tail(y.size() - 1) + y(0) * x.tail(x.size() - 1);
      return r;
    }
    case ConeType::kPsd: {
      const MatrixXd X = smat(x, b.side);
      const MatrixXd Y = smat(y, b.side);
      return svec(0.5 * (X * Y + Y * X));
    }
    case ConeType::kZero: break;
  }
  throw std::logic_error("interior point: bad cone");
}

// u with lambda o u = v, lambda being the scaled point of the block.
VectorXd inv_circ(const Block& b, const VectorXd& v) {
  const VectorXd& l = b.lambda;
  switch (b.type) {
    case ConeType::kNonneg: return v.cwiseQuotient(l);
    case ConeType::kSecondOrder: {
      const int r = static_cast<int>(v.size());
      const auto l1 = l.tail(r - 1);
      const auto v1 = v.tail(r - 1);
      const double det = l(0) * l(0) - l1.squaredNorm();
      const double lv = l1.dot(v1);
      VectorXd u(r);
      u(0) = (l(0) * v(0) - lv) / det;
      u.tail(r - 1) = (-v(0) * l1 + (det / l(0)) * v1 + (lv / l(0)) * l1) / det;
      return u;
    }
    case ConeType::kPsd: {
      // lambda is diagonal
      const MatrixXd L = smat(l, b.side);
      MatrixXd U = smat(v, b.side);
      for (int j = 0; j < b.side; ++j) {
        for (int i = 0; i < b.side; ++i) U(i, j) *= 2.0 / (L(i, i) + L(j, j));
      }
      return svec(U);
    }
    case ConeType::kZero: break;
  }
  throw std::logic_error("interior point: bad cone");
}

VectorXd identity(const Block& b) {
  switch (b.type) {
    case ConeType::kNonneg: return VectorXd::Ones(b.rows);
    case ConeType::kSecondOrder: {
      VectorXd e = VectorXd::Zero(b.rows);
      e(0) = 1.0;
      return e;
    }
    case ConeType::kPsd: return svec(MatrixXd::Identity(b.side, b.side));
    case ConeType::kZero: break;
  }
  throw std::logic_error("interior point: bad cone");
}

int degree(const Block& b) {
  switch (b.type) {
    case ConeType::kNonneg: return b.rows;
    case ConeType::kSecondOrder: return 1;
    case ConeType::kPsd: return b.side;
    case ConeType::kZero: break;
  }
  return 0;
}

// Largest t with v - t e still in the cone boundary sense: -min eigenvalue.
double max_violation(const Block& b, const VectorXd& v) {
  switch (b.type) {
    case ConeType::kNonneg: return -v.minCoeff();
    case ConeType::kSecondOrder: return v.tail(v.size() - 1).norm() - v(0);
    case ConeType::kPsd: {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(smat(v, b.side), Eigen::EigenvaluesOnly);
      return -eig.eigenvalues()(0);
    }
    case ConeType::kZero: break;
  }
  return 0.0;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest step a with v + a dv in the cone, v interior.
double max_step(const Block& b, const VectorXd& v, const VectorXd& dv) {
  switch (b.type) {
    case ConeType::kNonneg: {
      double a = kInf;
      for (int i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
      }
      return a;
    }
    case ConeType::kSecondOrder: {
      const int r = static_cast<int>(v.size());
      const double qa = dv(0) * dv(0) - dv.tail(r - 1).squaredNorm();
      const double qb = 2.0 * (v(0) * dv(0) - v.tail(r - 1).dot(dv.tail(r - 1)));
      const double qc = std::max(0.0, v(0) * v(0) - v.tail(r - 1).squaredNorm());
      double a = kInf;
      const double disc = qb * qb - 4.0 * qa * qc;
      if (std::abs(qa) < 1e-300) {
        if (qb < 0.0) a = -qc / qb;
      } else if (disc >= 0.0) {
        const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
        for (double root : {q / qa, q != 0.0 ? qc / q : kInf}) {
          if (root > 0.0) a = std::min(a, root);
        }
      }
      if (dv(0) < 0.0) a = std::min(a, -v(0) / dv(0));
      return a;
    }
    case ConeType::kPsd: {
      const Eigen::LLT<MatrixXd> llt(smat(v, b.side));
      if (llt.info() != Eigen::Success) return 0.0;
      const MatrixXd L = llt.matrixL();
      MatrixXd M = smat(dv, b.side);
      M = L.triangularView<Eigen::Lower>().solve(M);
      M = L.triangularView<Eigen::Lower>().solve(M.transpose().eval());
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues()(0);
      return lo >= 0.0 ? kInf : -1.0 / lo;
    }
    case ConeType::kZero: break;
  }
  return 0.0;
}

void set_identity_scaling(Block& b) {
  switch (b.type) {
    case ConeType::kNonneg: b.w = VectorXd::Ones(b.rows); break;
    case ConeType::kSecondOrder:
      b.W = MatrixXd::Identity(b.rows, b.rows);
      b.Winv = b.W;
      break;
    case ConeType::kPsd:
      b.R = MatrixXd::Identity(b.side, b.side);
      b.Rinv = b.R;
      break;
    case ConeType::kZero: break;
  }
}

// Nesterov-Todd scaling point for interior s, z. Returns false if either is
// numerically on the boundary.
bool set_nt_scaling(Block& b, const VectorXd& s, const VectorXd& z) {
  switch (b.type) {
    case ConeType::kNonneg:
      if (s.minCoeff() <= 0.0 || z.minCoeff() <= 0.0) return false;
      b.w = s.cwiseQuotient(z).cwiseSqrt();
      b.lambda = s.cwiseProduct(z).cwiseSqrt();
      return true;
    case ConeType::kSecondOrder: {
      const int r = b.rows;
      const double s2 = s(0) * s(0) - s.tail(r - 1).squaredNorm();
      const double z2 = z(0) * z(0) - z.tail(r - 1).squaredNorm();
      if (s(0) <= 0.0 || z(0) <= 0.0 || s2 <= 0.0 || z2 <= 0.0) return false;
      const double sn = std::sqrt(s2);
      const double zn = std::sqrt(z2);
      const VectorXd sb = s / sn;
      const VectorXd zb = z / zn;
      const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
      VectorXd wb(r);
      wb(0) = (sb(0) + zb(0)) / (2.0 * gamma);
      wb.tail(r - 1) = (sb.tail(r - 1) - zb.tail(r - 1)) / (2.0 * gamma);
      const double eta = std::sqrt(sn / zn);
      const auto w1 = wb.tail(r - 1);
      MatrixXd core = MatrixXd::Identity(r - 1, r - 1) + w1 * w1.transpose() / (1.0 + wb(0));
      b.W.resize(r, r);
      b.W(0, 0) = wb(0);
      b.W.block(0, 1, 1, r - 1) = w1.transpose();
      b.W.block(1, 0, r - 1, 1) = w1;
      b.W.block(1, 1, r - 1, r - 1) = core;
      b.Winv = b.W;
      b.Winv.block(0, 1, 1, r - 1) *= -1.0;
      b.Winv.block(1, 0, r - 1, 1) *= -1.0;
      b.W *= eta;
      b.Winv /= eta;
      b.lambda = b.W * z;
      return true;
    }
    case ConeType::kPsd: {
      const Eigen::LLT<MatrixXd> ls(smat(s, b.side));
      const Eigen::LLT<MatrixXd> lz(smat(z, b.side));
      if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
      const MatrixXd Ls = ls.matrixL();
      const MatrixXd Lz = lz.matrixL();
      const Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const VectorXd sig = svd.singularValues();
      if (sig.minCoeff() <= 0.0) return false;
      const VectorXd is = sig.cwiseSqrt().cwiseInverse();
      b.R = Ls * svd.matrixV() * is.asDiagonal();
      b.Rinv = is.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
      b.lambda = svec(MatrixXd(sig.asDiagonal()));
      return true;
    }
    case ConeType::kZero: break;
  }
  return false;
}

class Engine {
 public:
  Engine(const ConicProblem& p, const ConicProblem& original, const detail::Equilibration& eq,
         const SolverSettings& st)
      : p_(p), orig_(original), eq_(eq), st_(st) {
    n_ = p.num_vars();
    const RowSparse Ar = p.A;
    std::vector<Eigen::Triplet<double>> eq_trip, g_trip;
    int row = 0;
    for (const auto& cone : p.cones) {
      const int r = cone.rows();
      if (cone.type == ConeType::kZero) {
        for (int i = row; i < row + r; ++i) {
          for (RowSparse::InnerIterator it(Ar, i); it; ++it) {
            eq_trip.emplace_back(static_cast<int>(eq_rows_.size()), static_cast<int>(it.col()), it.value());
          }
          eq_rows_.push_back(i);
        }
      } else {
        Block b;
        b.type = cone.type;
        b.offset = static_cast<int>(cone_rows_.size());
        b.rows = r;
        b.side = cone.type == ConeType::kPsd ? cone.dim : 0;
        for (int i = row; i < row + r; ++i) {
          for (RowSparse::InnerIterator it(Ar, i); it; ++it) {
            g_trip.emplace_back(static_cast<int>(cone_rows_.size()), static_cast<int>(it.col()), it.value());
          }
          cone_rows_.push_back(i);
        }
        blocks_.push_back(std::move(b));
      }
      row += r;
    }
    const int pe = static_cast<int>(eq_rows_.size());
    const int mc = static_cast<int>(cone_rows_.size());
    Aeq_.resize(pe, n_);
    Aeq_.setFromTriplets(eq_trip.begin(), eq_trip.end());
    AeqT_ = Aeq_.transpose();
    G_.resize(mc, n_);
    G_.setFromTriplets(g_trip.begin(), g_trip.end());
    GT_ = G_.transpose();
    beq_.resize(pe);
    for (int i = 0; i < pe; ++i) beq_(i) = p.b(eq_rows_[i]);
    h_.resize(mc);
    for (int i = 0; i < mc; ++i) h_(i) = p.b(cone_rows_[i]);
    for (const auto& b : blocks_) nu_ += degree(b);

    // Column ownership: a column is private to a block if it appears in no
    // other block and in no equality row.
    constexpr int kFree = -1;
    constexpr int kShared = -2;
    std::vector<int> owner(n_, kFree);
    const RowSparse Gr = G_;
    const RowSparse Er = Aeq_;
    for (int i = 0; i < pe; ++i) {
      for (RowSparse::InnerIterator it(Er, i); it; ++it) owner[it.col()] = kShared;
    }
    for (int bi = 0; bi < static_cast<int>(blocks_.size()); ++bi) {
      const Block& b = blocks_[bi];
      for (int i = b.offset; i < b.offset + b.rows; ++i) {
        for (RowSparse::InnerIterator it(Gr, i); it; ++it) {
          int& o = owner[it.col()];
          if (o == kFree) o = bi;
          else if (o != bi) o = kShared;
        }
      }
    }
    shared_pos_.assign(n_, -1);
    for (int j = 0; j < n_; ++j) {
      if (owner[j] < 0) {
        shared_pos_[j] = static_cast<int>(shared_cols_.size());
        shared_cols_.push_back(j);
      } else {
        blocks_[owner[j]].priv.push_back(j);
      }
    }
    std::vector<int> local(n_, -1);
    for (auto& b : blocks_) {
      std::vector<int> cols = b.priv;
      const int np = static_cast<int>(b.priv.size());
      for (int i = b.offset; i < b.offset + b.rows; ++i) {
        for (RowSparse::InnerIterator it(Gr, i); it; ++it) {
          const int j = static_cast<int>(it.col());
          if (shared_pos_[j] >= 0 && local[j] < 0) {
            local[j] = 0;
            cols.push_back(j);
          }
        }
      }
      std::sort(cols.begin() + np, cols.end());
      for (int k = 0; k < static_cast<int>(cols.size()); ++k) local[cols[k]] = k;
      for (int k = np; k < static_cast<int>(cols.size()); ++k) b.shared.push_back(shared_pos_[cols[k]]);
      b.G = MatrixXd::Zero(b.rows, static_cast<int>(cols.size()));
      for (int i = b.offset; i < b.offset + b.rows; ++i) {
        for (RowSparse::InnerIterator it(Gr, i); it; ++it) b.G(i - b.offset, local[it.col()]) += it.value();
      }
      for (int j : cols) local[j] = -1;
    }
  }

  SolveResult run();

 private:
  template <class F>
  void per_block(const VectorXd& v, VectorXd& out, F f) const {
    out.resize(v.size());
    for (const auto& b : blocks_) out.segment(b.offset, b.rows) = f(b, VectorXd(v.segment(b.offset, b.rows)));
  }

  VectorXd scaled_weight_inverse(const VectorXd& v) const {  // (W^T W)^{-1} v
    VectorXd out;
    per_block(v, out, [](const Block& b, const VectorXd& u) { return apply(b, Op::kWinv, apply(b, Op::kWinvt, u)); });
    return out;
  }
  VectorXd scaled_weight(const VectorXd& v) const {  // W^T W v
    VectorXd out;
    per_block(v, out, [](const Block& b, const VectorXd& u) { return apply(b, Op::kWt, apply(b, Op::kW, u)); });
    return out;
  }

  bool factor();
  VectorXd solve_normal(const VectorXd& q) const;
  void solve_kkt(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx, VectorXd& dy,
                 VectorXd& dz) const;
  void solve_kkt_once(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx,
                      VectorXd& dy, VectorXd& dz) const;

  const ConicProblem& p_;     // equilibrated
  const ConicProblem& orig_;
  const detail::Equilibration& eq_;
  const SolverSettings& st_;
  int n_ = 0;
  int nu_ = 0;
  std::vector<int> eq_rows_;
  std::vector<int> cone_rows_;
  std::vector<Block> blocks_;
  SparseMatrix Aeq_, AeqT_, G_, GT_;
  VectorXd beq_, h_;
  std::vector<int> shared_cols_;
  std::vector<int> shared_pos_;

  Eigen::LLT<MatrixXd> H_;
  Eigen::LLT<MatrixXd> S_;
};

bool Engine::factor() {
  const int ns = static_cast<int>(shared_cols_.size());
  MatrixXd H = MatrixXd::Zero(ns, ns);
  for (auto& b : blocks_) {
    MatrixXd Gh(b.G.rows(), b.G.cols());
    switch (b.type) {
      case ConeType::kNonneg: Gh = b.w.cwiseInverse().asDiagonal() * b.G; break;
      case ConeType::kSecondOrder: Gh.noalias() = b.Winv * b.G; break;
      default:
        for (int j = 0; j < b.G.cols(); ++j) Gh.col(j) = apply(b, Op::kWinvt, b.G.col(j));
    }
    const int np = static_cast<int>(b.priv.size());
    const int nq = static_cast<int>(b.shared.size());
    const auto Gp = Gh.leftCols(np);
    const auto Gq = Gh.rightCols(nq);
    MatrixXd contrib;
    if (np > 0) {
      MatrixXd D = Gp.transpose() * Gp;
      D.diagonal().array() += 1e-13 * (D.diagonal().array().abs() + 1e-3);
      b.D.compute(D);
      if (b.D.info() != Eigen::Success) return false;
      b.C = Gq.transpose() * Gp;
      // G_q^T (I - G_p D^{-1} G_p^T) G_q
      const MatrixXd proj = Gq - Gp * b.D.solve(MatrixXd(Gp.transpose() * Gq));
      contrib = Gq.transpose() * proj;
    } else {
      contrib = Gq.transpose() * Gq;
    }
    if (nq == 0) continue;
    if (b.shared.back() - b.shared.front() == nq - 1) {
      H.block(b.shared.front(), b.shared.front(), nq, nq) += contrib;
    } else {
      for (int j = 0; j < nq; ++j) {
        for (int i = 0; i < nq; ++i) H(b.shared[i], b.shared[j]) += contrib(i, j);
      }
    }
  }
  double reg = 1e-13;
  for (int attempt = 0; attempt < 8; ++attempt, reg *= 100.0) {
    MatrixXd Hr = H;
    Hr.diagonal().array() += reg * (H.diagonal().array().abs() + 1e-3);
    H_.compute(Hr);
    if (H_.info() == Eigen::Success) break;
  }
  if (H_.info() != Eigen::Success) return false;

  const int pe = static_cast<int>(eq_rows_.size());
  if (pe > 0) {
    MatrixXd Y(n_, pe);
    const MatrixXd At = MatrixXd(AeqT_);
    for (int k = 0; k < pe; ++k) Y.col(k) = solve_normal(At.col(k));
    MatrixXd S = Aeq_ * Y;
    S.diagonal().array() += 1e-13 * std::max(1.0, S.diagonal().maxCoeff());
    S_.compute(S);
    if (S_.info() != Eigen::Success) return false;
  }
  return true;
}

// Applies the inverse of G^T (W^T W)^{-1} G (regularized) in full x space.
VectorXd Engine::solve_normal(const VectorXd& q) const {
  const int ns = static_cast<int>(shared_cols_.size());
  VectorXd qs(ns);
  for (int k = 0; k < ns; ++k) qs(k) = q(shared_cols_[k]);
  std::vector<VectorXd> tmp(blocks_.size());
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const Block& b = blocks_[bi];
    if (b.priv.empty()) continue;
    VectorXd qp(b.priv.size());
    for (std::size_t k = 0; k < b.priv.size(); ++k) qp(k) = q(b.priv[k]);
    tmp[bi] = qp;
    const VectorXd t = b.C * b.D.solve(qp);
    for (std::size_t k = 0; k < b.shared.size(); ++k) qs(b.shared[k]) -= t(k);
  }
  const VectorXd xs = ns > 0 ? VectorXd(H_.solve(qs)) : VectorXd();
  VectorXd x = VectorXd::Zero(n_);
  for (int k = 0; k < ns; ++k) x(shared_cols_[k]) = xs(k);
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const Block& b = blocks_[bi];
    if (b.priv.empty()) continue;
    VectorXd xq(b.shared.size());
    for (std::size_t k = 0; k < b.shared.size(); ++k) xq(k) = xs(b.shared[k]);
    const VectorXd xp = b.D.solve(VectorXd(tmp[bi] - b.C.transpose() * xq));
    for (std::size_t k = 0; k < b.priv.size(); ++k) x(b.priv[k]) = xp(k);
  }
  return x;
}

// [0 A^T G^T; A 0 0; G 0 -W^T W] (dx, dy, dz) = (r1, r2, r3)
void Engine::solve_kkt_once(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx,
                            VectorXd& dy, VectorXd& dz) const {
  const VectorXd q = r1 + GT_ * scaled_weight_inverse(r3);
  if (!eq_rows_.empty()) {
    dy = S_.solve(VectorXd(Aeq_ * solve_normal(q) - r2));
    dx = solve_normal(q - AeqT_ * dy);
  } else {
    dy = VectorXd();
    dx = solve_normal(q);
  }
  dz = scaled_weight_inverse(G_ * dx - r3);
}

void Engine::solve_kkt(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx,
                       VectorXd& dy, VectorXd& dz) const {
  solve_kkt_once(r1, r2, r3, dx, dy, dz);
  const double rn = std::max({inf_norm(r1), inf_norm(r2), inf_norm(r3), 1e-300});
  double last = kInf;
  for (int k = 0; k < 10; ++k) {
    const VectorXd e1 = r1 - AeqT_ * dy - GT_ * dz;
    const VectorXd e2 = r2 - Aeq_ * dx;
    const VectorXd e3 = r3 - (G_ * dx - scaled_weight(dz));
    const double err = std::max({inf_norm(e1), inf_norm(e2), inf_norm(e3)});
    if (st_.verbose) std::cerr << "  refine " << k << " " << err / rn << "\n";
    // Stop once converged or when a correction no longer halves the error.
    if (err <= 1e-14 * rn || err > 0.5 * last) break;
    last = err;
    VectorXd cx, cy, cz;
    solve_kkt_once(e1, e2, e3, cx, cy, cz);
    dx += cx;
    dy += cy;
    dz += cz;
  }
}

SolveResult Engine::run() {
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const int m = p_.num_rows();
  const int pe = static_cast<int>(eq_rows_.size());
  const int mc = static_cast<int>(cone_rows_.size());
  const VectorXd& c = p_.c;
  SolveResult res;

  // Starting point from two least-squares solves with W = I.
  for (auto& b : blocks_) set_identity_scaling(b);
  if (!factor()) throw std::runtime_error("interior point: singular initial system");
  VectorXd x, y, z, s;
  {
    VectorXd dz;
    solve_kkt(VectorXd::Zero(n_), beq_, h_, x, y, dz);
    s = -dz;
    solve_kkt(-c, VectorXd::Zero(pe), VectorXd::Zero(mc), dz, y, z);
  }
  const auto shift = [&](VectorXd& v) {
    double a = -kInf;
    for (const auto& b : blocks_) a = std::max(a, max_violation(b, v.segment(b.offset, b.rows)));
    if (blocks_.empty() || a < -1e-8 * std::max(1.0, v.norm())) return;
    for (const auto& b : blocks_) v.segment(b.offset, b.rows) += (1.0 + a) * identity(b);
  };
  shift(s);
  shift(z);
  double tau = 1.0;
  double kappa = 1.0;

  const double b_norm = inf_norm(orig_.b);
  const double c_norm = inf_norm(orig_.c);
  const auto full_dual = [&](const VectorXd& yy, const VectorXd& zz) {
    VectorXd f = VectorXd::Zero(m);
    for (int i = 0; i < pe; ++i) f(eq_rows_[i]) = yy(i);
    for (int i = 0; i < mc; ++i) f(cone_rows_[i]) = zz(i);
    return VectorXd(eq_.D.cwiseProduct(f));
  };
  const auto full_slack = [&](const VectorXd& ss) {
    VectorXd f = VectorXd::Zero(m);
    for (int i = 0; i < mc; ++i) f(cone_rows_[i]) = ss(i);
    return VectorXd(f.cwiseQuotient(eq_.D));
  };
  const SparseMatrix At = orig_.A.transpose();

  // Best iterate so far by the worst ratio of residual to tolerance.
  VectorXd xh, yh, sh;
  double best = kInf;
  double best_loose = kInf;
  SolveResult best_res;
  int iter = 0;
  bool stalled = false;
  for (;; ++iter) {
    {
      const VectorXd xi = eq_.E.cwiseProduct(x) / (tau * eq_.b_scale);
      const VectorXd yi = full_dual(y, z) / (tau * eq_.c_scale);
      const VectorXd si = full_slack(s) / (tau * eq_.b_scale);
      const VectorXd Ax = orig_.A * xi;
      const VectorXd Aty = At * yi;
      const double cx = orig_.c.dot(xi);
      const double by = orig_.b.dot(yi);
      SolveResult cur;
      cur.primal_residual = inf_norm(Ax + si - orig_.b);
      cur.dual_residual = inf_norm(Aty + orig_.c);
      cur.gap = std::abs(cx + by);
      cur.objective = cx;
      cur.dual_objective = -by;
      const double p_tol = st_.eps_abs + st_.eps_rel * std::max({inf_norm(Ax), inf_norm(si), b_norm});
      const double d_tol = st_.eps_abs + st_.eps_rel * std::max(inf_norm(Aty), c_norm);
      const double g_tol = st_.eps_abs + st_.eps_rel * std::max(std::abs(cx), std::abs(by));
      const double merit = std::max({cur.primal_residual / p_tol, cur.dual_residual / d_tol, cur.gap / g_tol});
      const double er = st_.eps_reduced;
      const double loose = std::max({cur.primal_residual / (er + er * std::max({inf_norm(Ax), inf_norm(si), b_norm})),
                                     cur.dual_residual / (er + er * std::max(inf_norm(Aty), c_norm)),
                                     cur.gap / (er + er * std::max(std::abs(cx), std::abs(by)))});
      if (st_.verbose) {
        std::cerr << "ipm " << iter << " pres " << cur.primal_residual << " dres " << cur.dual_residual
                  << " gap " << cur.gap << " obj " << cx << " merit " << merit << " tau " << tau
                  << " kappa " << kappa << "\n";
      }
      if (merit < best && std::isfinite(merit)) {
        best = merit;
        best_res = cur;
        best_loose = loose;
        xh = xi;
        yh = yi;
        sh = si;
      }
      if (merit <= 1.0) {
        res = cur;
        res.status = SolveStatus::kOptimal;
        break;
      }
      // Numerical breakdown near the end: residuals grow again.
      if (best < 1e3 && merit > 1e3 * best) stalled = true;

      const VectorXd yd = full_dual(y, z);
      const double byd = orig_.b.dot(yd);
      if (byd < 0.0) {
        const VectorXd cert = yd / -byd;
        if (inf_norm(At * cert) <= st_.eps_infeas) {
          res.status = SolveStatus::kPrimalInfeasible;
          res.certificate = cert;
          break;
        }
      }
      const VectorXd xd = eq_.E.cwiseProduct(x);
      const double cxd = orig_.c.dot(xd);
      if (cxd < 0.0) {
        const VectorXd xc = xd / -cxd;
        const VectorXd sc = full_slack(s) / -cxd;
        if (inf_norm(orig_.A * xc + sc) <= st_.eps_infeas) {
          res.status = SolveStatus::kDualInfeasible;
          res.certificate = xc;
          res.s = sc;
          break;
        }
      }
    }
    if (iter >= std::min(st_.max_iters, st_.interior_max_iters) || stalled) break;
    if (st_.time_limit_s > 0.0 && elapsed() > st_.time_limit_s) {
      res.timed_out = true;
      break;
    }

    const VectorXd Fx = -(AeqT_ * y + GT_ * z + c * tau);
    const VectorXd Fy = Aeq_ * x - beq_ * tau;
    const VectorXd Fz = s + G_ * x - h_ * tau;
    const double Ft = kappa + c.dot(x) + beq_.dot(y) + h_.dot(z);
    const double mu = (s.dot(z) + tau * kappa) / (nu_ + 1);

    bool ok = true;
    for (auto& b : blocks_) ok = ok && set_nt_scaling(b, s.segment(b.offset, b.rows), z.segment(b.offset, b.rows));
    if (!ok || !factor()) break;

    VectorXd d2x, d2y, d2z;
    solve_kkt(-c, beq_, h_, d2x, d2y, d2z);
    const double d2q = c.dot(d2x) + beq_.dot(d2y) + h_.dot(d2z);

    // One Newton direction for the given centering and complementarity terms;
    // ds_scaled is W^{-T} ds.
    struct Direction {
      VectorXd x, y, z, s, s_scaled;
      double tau = 0.0, kappa = 0.0;
    };
    const auto direction = [&](double sigma, const VectorXd& xi, double xi_tau) {
      VectorXd xi_div(mc), r3(mc);
      for (const auto& b : blocks_) {
        xi_div.segment(b.offset, b.rows) = inv_circ(b, xi.segment(b.offset, b.rows));
        r3.segment(b.offset, b.rows) = apply(b, Op::kWt, xi_div.segment(b.offset, b.rows));
      }
      r3 = -(1.0 - sigma) * Fz - r3;
      Direction d;
      solve_kkt((1.0 - sigma) * Fx, -(1.0 - sigma) * Fy, r3, d.x, d.y, d.z);
      const double d1q = c.dot(d.x) + beq_.dot(d.y) + h_.dot(d.z);
      d.tau = (-(1.0 - sigma) * Ft - xi_tau / tau - d1q) / (-kappa / tau + d2q);
      d.x += d.tau * d2x;
      d.y += d.tau * d2y;
      d.z += d.tau * d2z;
      d.s_scaled.resize(mc);
      d.s.resize(mc);
      for (const auto& b : blocks_) {
        d.s_scaled.segment(b.offset, b.rows) =
            xi_div.segment(b.offset, b.rows) - apply(b, Op::kW, d.z.segment(b.offset, b.rows));
        d.s.segment(b.offset, b.rows) = apply(b, Op::kWt, d.s_scaled.segment(b.offset, b.rows));
      }
      d.kappa = (xi_tau - kappa * d.tau) / tau;
      return d;
    };
    const auto step_to_boundary = [&](const Direction& d) {
      double a = kInf;
      for (const auto& b : blocks_) {
        a = std::min(a, max_step(b, s.segment(b.offset, b.rows), d.s.segment(b.offset, b.rows)));
        a = std::min(a, max_step(b, z.segment(b.offset, b.rows), d.z.segment(b.offset, b.rows)));
      }
      if (d.tau < 0.0) a = std::min(a, -tau / d.tau);
      if (d.kappa < 0.0) a = std::min(a, -kappa / d.kappa);
      return a;
    };

    VectorXd xi(mc);
    for (const auto& b : blocks_) xi.segment(b.offset, b.rows) = -circ(b, b.lambda, b.lambda);
    const Direction aff = direction(0.0, xi, -tau * kappa);
    const double a_aff = std::min(1.0, step_to_boundary(aff));
    const double sigma = std::clamp(std::pow(1.0 - a_aff, 3), 0.0, 1.0);

    for (const auto& b : blocks_) {
      const VectorXd wdz = apply(b, Op::kW, aff.z.segment(b.offset, b.rows));
      xi.segment(b.offset, b.rows) += sigma * mu * identity(b) -
                                      circ(b, aff.s_scaled.segment(b.offset, b.rows), wdz);
    }
    const Direction d = direction(sigma, xi, sigma * mu - tau * kappa - aff.tau * aff.kappa);
    const double a = std::min(1.0, 0.99 * step_to_boundary(d));
    if (st_.verbose) std::cerr << "  step aff " << a_aff << " sigma " << sigma << " step " << a << " mu " << mu << "\n";
    if (!(a > 1e-10) || !d.x.allFinite()) {
      stalled = true;
      continue;
    }
    x += a * d.x;
    y += a * d.y;
    z += a * d.z;
    s += a * d.s;
    tau += a * d.tau;
    kappa += a * d.kappa;
  }

  res.iterations = iter;
  if (res.status == SolveStatus::kMaxIters) {
    const bool timed_out = res.timed_out;
    res = best_res;
    res.status = best_loose <= 1.0 ? SolveStatus::kOptimalInaccurate : SolveStatus::kMaxIters;
    res.timed_out = timed_out;
    res.iterations = iter;
  }
  if (has_solution(res.status) || res.status == SolveStatus::kMaxIters) {
    if (xh.size() == 0) {
      xh = VectorXd::Zero(n_);
      yh = VectorXd::Zero(m);
      sh = VectorXd::Zero(m);
    }
    res.x = xh;
    res.y = yh;
    res.s = sh;
  } else {
    res.x = VectorXd::Zero(n_);
    res.y = VectorXd::Zero(m);
    if (res.s.size() != m) res.s = VectorXd::Zero(m);
    res.objective = res.status == SolveStatus::kPrimalInfeasible ? kInf : -kInf;
  }
  res.runtime_s = elapsed();
  return res;
}

}  // namespace

SolveResult InteriorPointSolver::solve(const ConicProblem& problem, const SolverSettings& st) const {
  problem.validate();
  if (problem.num_vars() == 0 || problem.num_rows() == 0) throw std::invalid_argument("solve: empty problem");
  ConicProblem scaled = problem;
  scaled.A.makeCompressed();
  const detail::Equilibration eq = detail::equilibrate(scaled.A, scaled.b, scaled.c, scaled.cones, st);
  Engine e(scaled, problem, eq, st);
  return e.run();
}

}  // namespace misac::conic
