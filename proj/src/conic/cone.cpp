#include "misac/conic/cone.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace misac::conic {

std::string to_string(ConeType t) {
  switch (t) {
    case ConeType::kZero: return "zero";
    case ConeType::kNonneg: return "nonneg";
    case ConeType::kSecondOrder: return "soc";
    case ConeType::kPsd: return "psd";
  }
  return "?";
}

int total_rows(const std::vector<Cone>& cones) {
  int r = 0;
  for (const auto& c : cones) r += c.rows();
  return r;
}

Eigen::VectorXd svec(const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  Eigen::VectorXd v(n * (n + 1) / 2);
  const double r2 = std::sqrt(2.0);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    v(idx++) = X(j, j);
    for (int i = j + 1; i < n; ++i) v(idx++) = r2 * 0.5 * (X(i, j) + X(j, i));
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int n) {
  if (v.size() != n * (n + 1) / 2) throw std::invalid_argument("smat: size mismatch");
  Eigen::MatrixXd X(n, n);
  const double ir2 = 1.0 / std::sqrt(2.0);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    X(j, j) = v(idx++);
    for (int i = j + 1; i < n; ++i) {
      X(i, j) = X(j, i) = ir2 * v(idx++);
    }
  }
  return X;
}

namespace {

void project_soc(Eigen::Ref<Eigen::VectorXd> v) {
  const double t = v(0);
  const double nx = v.tail(v.size() - 1).norm();
  if (nx <= t) return;
  if (nx <= -t) {
    v.setZero();
    return;
  }
  const double a = 0.5 * (nx + t);
  v(0) = a;
  v.tail(v.size() - 1) *= a / nx;
}

void project_psd(Eigen::Ref<Eigen::VectorXd> v, int side) {
  if (side == 1) {
    v(0) = std::max(v(0), 0.0);
    return;
  }
  const Eigen::MatrixXd X = smat(v, side);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(X);
  if (eig.info() != Eigen::Success) throw std::runtime_error("project_psd: eigensolver failed");
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& U = eig.eigenvectors();
  // Only the eigenpairs with positive eigenvalues contribute.
  int first = 0;
  while (first < side && lam(first) <= 0.0) ++first;
  if (first == side) {
    v.setZero();
    return;
  }
  const int k = side - first;
  const Eigen::MatrixXd Up = U.rightCols(k) * lam.tail(k).cwiseSqrt().asDiagonal();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(side, side);
  P.selfadjointView<Eigen::Lower>().rankUpdate(Up);
  const double r2 = std::sqrt(2.0);
  int idx = 0;
  for (int j = 0; j < side; ++j) {
    v(idx++) = P(j, j);
    for (int i = j + 1; i < side; ++i) v(idx++) = r2 * P(i, j);
  }
}

}  // namespace

void project_cone(Eigen::Ref<Eigen::VectorXd> v, const Cone& cone) {
  if (v.size() != cone.rows()) throw std::invalid_argument("project_cone: dimension mismatch");
  switch (cone.type) {
    case ConeType::kZero:
      v.setZero();
      break;
    case ConeType::kNonneg:
      v = v.cwiseMax(0.0);
      break;
    case ConeType::kSecondOrder:
      project_soc(v);
      break;
    case ConeType::kPsd:
      project_psd(v, cone.dim);
      break;
  }
}

void project_dual_cone(Eigen::Ref<Eigen::VectorXd> v, const Cone& cone) {
  if (cone.type == ConeType::kZero) {
    if (v.size() != cone.rows()) throw std::invalid_argument("project_dual_cone: dimension mismatch");
    return;
  }
  project_cone(v, cone);
}

Eigen::VectorXd project(const Eigen::VectorXd& v, const Cone& cone) {
  Eigen::VectorXd out = v;
  project_cone(out, cone);
  return out;
}

Eigen::VectorXd project_dual(const Eigen::VectorXd& v, const Cone& cone) {
  Eigen::VectorXd out = v;
  project_dual_cone(out, cone);
  return out;
}

double cone_violation(const Eigen::VectorXd& v, const Cone& cone) {
  return (v - project(v, cone)).lpNorm<Eigen::Infinity>();
}

}  // namespace misac::conic
