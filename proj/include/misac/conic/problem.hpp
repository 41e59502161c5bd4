#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "misac/conic/cone.hpp"

namespace misac::conic {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Standard-form conic program
///
///   minimize    c^T x
///   subject to  A x + s = b,  s in K = K_1 x ... x K_p
///
/// with dual   maximize -b^T y  subject to  A^T y + c = 0,  y in K*.
/// Rows of A follow the cone list order.
struct ConicProblem {
  Eigen::VectorXd c;
  SparseMatrix A;
  Eigen::VectorXd b;
  std::vector<Cone> cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }

  /// Throws std::invalid_argument if dimensions are inconsistent.
  void validate() const;
};

/// Accumulates a ConicProblem row block by row block. Cones must be opened in
/// the order their rows should appear; duplicate (row, col) entries are summed.
class ProblemBuilder {
 public:
  /// Reserves `count` consecutive variables and returns the first index.
  int add_variables(int count);
  /// Appends a cone block and returns its first row.
  int add_cone(const Cone& cone);

  void add(int row, int col, double value);
  void set_rhs(int row, double value);
  void set_objective(int col, double value);

  int num_vars() const { return num_vars_; }
  int num_rows() const { return num_rows_; }

  ConicProblem build() const;

 private:
  int num_vars_ = 0;
  int num_rows_ = 0;
  std::vector<Cone> cones_;
  std::vector<Eigen::Triplet<double>> triplets_;
  std::vector<std::pair<int, double>> rhs_;
  std::vector<std::pair<int, double>> objective_;
};

/// Sparse text format for cross-solver debugging:
///
///   misac-conic 1
///   <n> <m> <nnz>
///   cones <count> <type> <dim> <type> <dim> ...      (type: zero|nonneg|soc|psd)
///   c <n values>
///   b <m values>
///   <row> <col> <value>                                (nnz lines, 0-based)
void write_problem(std::ostream& out, const ConicProblem& p);
ConicProblem read_problem(std::istream& in);

}  // namespace misac::conic
