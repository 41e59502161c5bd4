#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace misac::conic {

enum class ConeType { kZero, kNonneg, kSecondOrder, kPsd };

/// One block of the cone product. For kPsd, `dim` is the matrix side and the
/// block consumes side (side + 1) / 2 rows in scaled-lower-triangle form.
struct Cone {
  ConeType type = ConeType::kZero;
  int dim = 0;

  static Cone zero(int n) { return {ConeType::kZero, n}; }
  static Cone nonneg(int n) { return {ConeType::kNonneg, n}; }
  static Cone soc(int n) { return {ConeType::kSecondOrder, n}; }
  static Cone psd(int side) { return {ConeType::kPsd, side}; }

  int rows() const { return type == ConeType::kPsd ? dim * (dim + 1) / 2 : dim; }

  friend bool operator==(const Cone&, const Cone&) = default;
};

std::string to_string(ConeType t);

/// Total rows consumed by a cone list.
int total_rows(const std::vector<Cone>& cones);

// Scaled lower-triangle vectorization, column by column:
//   (X00, sqrt2 X10, ..., sqrt2 X(n-1)0, X11, sqrt2 X21, ...)
// Off-diagonals carry sqrt(2) so that <svec(X), svec(Y)> = Tr(X Y).

/// Index of (row, col), row >= col, inside svec for a matrix of `side`.
inline int svec_index(int row, int col, int side) {
  return col * side - col * (col - 1) / 2 + (row - col);
}

Eigen::VectorXd svec(const Eigen::MatrixXd& X);
Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int side);

/// Euclidean projection onto the cone, in place.
void project_cone(Eigen::Ref<Eigen::VectorXd> v, const Cone& cone);
/// Euclidean projection onto the dual cone (free space for the zero cone;
/// the other cones are self-dual).
void project_dual_cone(Eigen::Ref<Eigen::VectorXd> v, const Cone& cone);

Eigen::VectorXd project(const Eigen::VectorXd& v, const Cone& cone);
Eigen::VectorXd project_dual(const Eigen::VectorXd& v, const Cone& cone);

/// Distance of v from the cone measured as ||v - proj(v)||_inf.
double cone_violation(const Eigen::VectorXd& v, const Cone& cone);

}  // namespace misac::conic
