#pragma once

#include <vector>

#include "misac/types.hpp"

namespace misac {

/// Left-closed uniform grid over [-pi/2, pi/2): phi_i = -pi/2 + i pi / I.
///
/// Steering vectors are cached per direction for one array (N entries). The
/// transmit pattern uses the response of the stacked array, i.e. the same ULA
/// formula continued over all N * blocks elements.
class AngularGrid {
 public:
  AngularGrid(int size, int antennas, double spacing);

  int size() const { return static_cast<int>(directions_.size()); }
  int antennas() const { return antennas_; }
  double spacing() const { return spacing_; }
  double direction(int i) const { return directions_[i]; }
  const std::vector<double>& directions() const { return directions_; }

  /// a(phi_i), length N.
  const VectorXc& steering(int i) const { return steering_[i]; }
  /// a(phi_i) with N * blocks entries.
  VectorXc stacked_steering(int i, int blocks) const;

 private:
  int antennas_;
  double spacing_;
  std::vector<double> directions_;
  std::vector<VectorXc> steering_;
};

/// Binary mask of width psi around theta0: 1 iff |phi_i - theta0| <= psi / 2.
struct IdealPattern {
  VectorXd mask;
  double center = 0.0;
  double width = 0.0;

  int ones() const { return static_cast<int>(mask.sum()); }
};

IdealPattern ideal_pattern(double center, double width, const AngularGrid& grid);

/// Throws std::invalid_argument if X deviates from Hermitian beyond a
/// relative tolerance.
void require_hermitian(const MatrixXc& X, const char* what);

/// a^H(phi) Z D_m a(phi) for a stacked Z; complex because Z D_m is not
/// Hermitian. Evaluated at an arbitrary angle.
cdouble transmit_pattern_at(const MatrixXc& Z, int m, double phi, int antennas, double spacing);
/// Same, at grid direction i.
cdouble transmit_pattern_value(const MatrixXc& Z, int m, int i, const AngularGrid& grid);

/// a^H(phi) V a(phi), real for Hermitian V.
double receive_pattern_at(const MatrixXc& V, double phi, double spacing);
double receive_pattern_value(const MatrixXc& V, int i, const AngularGrid& grid);

/// sum_i |zeta P(phi_i) - a^H Z D_m a|
double transmit_mismatch(double zeta, const MatrixXc& Z, int m, const IdealPattern& ideal,
                         const AngularGrid& grid);
/// sum_i |zeta P(phi_i) - a^H V a|
double receive_mismatch(double zeta, const MatrixXc& V, const IdealPattern& ideal,
                        const AngularGrid& grid);

}  // namespace misac
