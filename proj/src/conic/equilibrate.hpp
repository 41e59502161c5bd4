#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "misac/conic/problem.hpp"
#include "misac/conic/solver.hpp"

namespace misac::conic::detail {

using Eigen::VectorXd;

constexpr double kMinScale = 1e-4;
constexpr double kMaxScale = 1e4;

// Row and column equilibration A_hat = D A E. Rows of one SOC or PSD block
// share a factor so that the scaled cone is still the same cone.
struct Equilibration {
  VectorXd D;
  VectorXd E;
  double b_scale = 1.0;
  double c_scale = 1.0;
};

inline Equilibration equilibrate(SparseMatrix& A, VectorXd& b, VectorXd& c,
                          const std::vector<Cone>& cones, const SolverSettings& st) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Equilibration eq;
  eq.D = VectorXd::Ones(m);
  eq.E = VectorXd::Ones(n);
  if (!st.scaling) return eq;

  VectorXd row_norm(m), col_norm(n), d(m), e(n);
  for (int pass = 0; pass < st.scaling_passes; ++pass) {
    row_norm.setZero();
    col_norm.setZero();
    for (int j = 0; j < n; ++j) {
      for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
        const double a = std::abs(it.value());
        row_norm(it.row()) = std::max(row_norm(it.row()), a);
        col_norm(j) = std::max(col_norm(j), a);
      }
    }
    int row = 0;
    for (const auto& cone : cones) {
      const int r = cone.rows();
      if (cone.type == ConeType::kSecondOrder || cone.type == ConeType::kPsd) {
        const double mean = row_norm.segment(row, r).mean();
        row_norm.segment(row, r).setConstant(mean);
      }
      row += r;
    }
    for (int i = 0; i < m; ++i) d(i) = row_norm(i) < 1e-10 ? 1.0 : 1.0 / std::sqrt(row_norm(i));
    for (int j = 0; j < n; ++j) e(j) = col_norm(j) < 1e-10 ? 1.0 : 1.0 / std::sqrt(col_norm(j));
    for (int i = 0; i < m; ++i) {
      const double nd = std::clamp(eq.D(i) * d(i), kMinScale, kMaxScale);
      d(i) = nd / eq.D(i);
      eq.D(i) = nd;
    }
    for (int j = 0; j < n; ++j) {
      const double ne = std::clamp(eq.E(j) * e(j), kMinScale, kMaxScale);
      e(j) = ne / eq.E(j);
      eq.E(j) = ne;
    }
    for (int j = 0; j < n; ++j) {
      for (SparseMatrix::InnerIterator it(A, j); it; ++it) it.valueRef() *= d(it.row()) * e(j);
    }
  }

  b = eq.D.cwiseProduct(b);
  c = eq.E.cwiseProduct(c);

  double mean_row = 0.0;
  double mean_col = 0.0;
  {
    VectorXd rn = VectorXd::Zero(m);
    for (int j = 0; j < n; ++j) {
      double cn = 0.0;
      for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
        cn += it.value() * it.value();
        rn(it.row()) += it.value() * it.value();
      }
      mean_col += std::sqrt(cn);
    }
    mean_col /= n;
    mean_row = rn.cwiseSqrt().mean();
  }
  eq.b_scale = st.scale * mean_col / std::max(b.norm(), kMinScale);
  eq.c_scale = st.scale * mean_row / std::max(c.norm(), kMinScale);
  b *= eq.b_scale;
  c *= eq.c_scale;
  return eq;
}

}  // namespace misac::conic::detail
