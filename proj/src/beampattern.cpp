#include "misac/beampattern.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "misac/channel.hpp"

namespace misac {

namespace {
// Absorbs rounding in grid arithmetic so that closed-interval endpoints that
// fall exactly on a grid point are kept.
constexpr double kAngleSlack = 1e-12;
}  // namespace

AngularGrid::AngularGrid(int size, int antennas, double spacing)
    : antennas_(antennas), spacing_(spacing) {
  if (size < 2) throw std::invalid_argument("AngularGrid: size >= 2");
  for (int i = 0; i < size; ++i) {
    const double phi = -kPi / 2.0 + i * kPi / size;
    directions_.push_back(phi);
    steering_.push_back(steering_vector(phi, antennas, spacing));
  }
}

VectorXc AngularGrid::stacked_steering(int i, int blocks) const {
  return steering_vector(directions_[i], antennas_ * blocks, spacing_);
}

IdealPattern ideal_pattern(double center, double width, const AngularGrid& grid) {
  IdealPattern p;
  p.center = center;
  p.width = width;
  p.mask = VectorXd::Zero(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    if (std::abs(grid.direction(i) - center) <= width / 2.0 + kAngleSlack) p.mask(i) = 1.0;
  }
  return p;
}

void require_hermitian(const MatrixXc& X, const char* what) {
  if (X.rows() != X.cols()) throw std::invalid_argument(std::string(what) + ": matrix not square");
  const double scale = std::max(1.0, X.norm());
  if ((X - X.adjoint()).norm() > 1e-8 * scale) {
    throw std::invalid_argument(std::string(what) + ": matrix not Hermitian");
  }
}

cdouble transmit_pattern_at(const MatrixXc& Z, int m, double phi, int antennas, double spacing) {
  const int blocks = static_cast<int>(Z.rows()) / antennas;
  if (m < 0 || m >= blocks) throw std::invalid_argument("transmit pattern: block index");
  const VectorXc a = steering_vector(phi, static_cast<int>(Z.rows()), spacing);
  // a^H Z D_m a = a^H (Z[:, block m] a[block m])
  return a.dot(Z.middleCols(m * antennas, antennas) * a.segment(m * antennas, antennas));
}

cdouble transmit_pattern_value(const MatrixXc& Z, int m, int i, const AngularGrid& grid) {
  const int N = grid.antennas();
  const int blocks = static_cast<int>(Z.rows()) / N;
  if (m < 0 || m >= blocks) throw std::invalid_argument("transmit pattern: block index");
  const VectorXc a = grid.stacked_steering(i, blocks);
  return a.dot(Z.middleCols(m * N, N) * a.segment(m * N, N));
}

double receive_pattern_at(const MatrixXc& V, double phi, double spacing) {
  const VectorXc a = steering_vector(phi, static_cast<int>(V.rows()), spacing);
  return a.dot(V * a).real();
}

double receive_pattern_value(const MatrixXc& V, int i, const AngularGrid& grid) {
  const VectorXc& a = grid.steering(i);
  return a.dot(V * a).real();
}

double transmit_mismatch(double zeta, const MatrixXc& Z, int m, const IdealPattern& ideal,
                         const AngularGrid& grid) {
  require_hermitian(Z, "transmit_mismatch");
  double total = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    total += std::abs(zeta * ideal.mask(i) - transmit_pattern_value(Z, m, i, grid));
  }
  return total;
}

double receive_mismatch(double zeta, const MatrixXc& V, const IdealPattern& ideal,
                        const AngularGrid& grid) {
  require_hermitian(V, "receive_mismatch");
  if (V.rows() != grid.antennas()) throw std::invalid_argument("receive_mismatch: dimension");
  double total = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    total += std::abs(zeta * ideal.mask(i) - receive_pattern_value(V, i, grid));
  }
  return total;
}

}  // namespace misac
