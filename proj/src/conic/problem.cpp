#include "misac/conic/problem.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace misac::conic {

void ConicProblem::validate() const {
  if (A.rows() != b.size() || A.cols() != c.size()) {
    throw std::invalid_argument("ConicProblem: A must be rows(b) x size(c)");
  }
  if (total_rows(cones) != b.size()) {
    throw std::invalid_argument("ConicProblem: cone rows do not match rows of A");
  }
  for (const auto& k : cones) {
    if (k.dim < 1) throw std::invalid_argument("ConicProblem: empty cone");
  }
}

int ProblemBuilder::add_variables(int count) {
  const int first = num_vars_;
  num_vars_ += count;
  return first;
}

int ProblemBuilder::add_cone(const Cone& cone) {
  const int first = num_rows_;
  cones_.push_back(cone);
  num_rows_ += cone.rows();
  return first;
}

void ProblemBuilder::add(int row, int col, double value) {
  if (row < 0 || row >= num_rows_ || col < 0 || col >= num_vars_) {
    throw std::out_of_range("ProblemBuilder::add: index out of range");
  }
  if (value != 0.0) triplets_.emplace_back(row, col, value);
}

void ProblemBuilder::set_rhs(int row, double value) { rhs_.emplace_back(row, value); }

void ProblemBuilder::set_objective(int col, double value) { objective_.emplace_back(col, value); }

ConicProblem ProblemBuilder::build() const {
  ConicProblem p;
  p.cones = cones_;
  p.c = Eigen::VectorXd::Zero(num_vars_);
  p.b = Eigen::VectorXd::Zero(num_rows_);
  for (const auto& [col, v] : objective_) p.c(col) += v;
  for (const auto& [row, v] : rhs_) p.b(row) = v;
  p.A.resize(num_rows_, num_vars_);
  p.A.setFromTriplets(triplets_.begin(), triplets_.end());
  p.A.makeCompressed();
  p.validate();
  return p;
}

namespace {

ConeType parse_cone_type(const std::string& s) {
  if (s == "zero") return ConeType::kZero;
  if (s == "nonneg") return ConeType::kNonneg;
  if (s == "soc") return ConeType::kSecondOrder;
  if (s == "psd") return ConeType::kPsd;
  throw std::runtime_error("read_problem: unknown cone type " + s);
}

void expect(std::istream& in, const std::string& word) {
  std::string w;
  if (!(in >> w) || w != word) throw std::runtime_error("read_problem: expected '" + word + "'");
}

}  // namespace

void write_problem(std::ostream& out, const ConicProblem& p) {
  const auto old = out.precision(17);
  out << "misac-conic 1\n";
  out << p.num_vars() << ' ' << p.num_rows() << ' ' << p.A.nonZeros() << '\n';
  out << "cones " << p.cones.size();
  for (const auto& k : p.cones) out << ' ' << to_string(k.type) << ' ' << k.dim;
  out << "\nc";
  for (int i = 0; i < p.num_vars(); ++i) out << ' ' << p.c(i);
  out << "\nb";
  for (int i = 0; i < p.num_rows(); ++i) out << ' ' << p.b(i);
  out << '\n';
  for (int col = 0; col < p.A.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(p.A, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  out.precision(old);
}

ConicProblem read_problem(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "misac-conic" || version != 1) {
    throw std::runtime_error("read_problem: bad header");
  }
  int n = 0, m = 0;
  long nnz = 0;
  if (!(in >> n >> m >> nnz)) throw std::runtime_error("read_problem: bad dimensions");
  ConicProblem p;
  expect(in, "cones");
  std::size_t count = 0;
  in >> count;
  for (std::size_t i = 0; i < count; ++i) {
    std::string type;
    int dim = 0;
    if (!(in >> type >> dim)) throw std::runtime_error("read_problem: bad cone list");
    p.cones.push_back({parse_cone_type(type), dim});
  }
  expect(in, "c");
  p.c.resize(n);
  for (int i = 0; i < n; ++i) in >> p.c(i);
  expect(in, "b");
  p.b.resize(m);
  for (int i = 0; i < m; ++i) in >> p.b(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (long k = 0; k < nnz; ++k) {
    int r = 0, c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v)) throw std::runtime_error("read_problem: truncated triplets");
    trips.emplace_back(r, c, v);
  }
  p.A.resize(m, n);
  p.A.setFromTriplets(trips.begin(), trips.end());
  p.A.makeCompressed();
  p.validate();
  return p;
}

}  // namespace misac::conic
