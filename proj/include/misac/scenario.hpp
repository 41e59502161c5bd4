#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "misac/config.hpp"
#include "misac/types.hpp"

namespace misac {

/// Geometric layout of the coordinated multi-cell network.
///
/// Angle tables hold the bearing of the far point measured from the near
/// point's array broadside, folded into [-pi/2, pi/2] (see angle_between).
struct Scenario {
  double cell_radius = 0.0;
  std::vector<Point2> bs_positions;
  std::vector<double> bs_orientation;  // broadside direction, rad, CCW from +x
  std::vector<Point2> user_positions;
  std::vector<Point2> target_positions;  // index 0: desired target

  MatrixXd bs_target_distance;  // (M, J+1)
  MatrixXd bs_target_angle;
  MatrixXd bs_user_distance;  // (M, K)
  MatrixXd bs_user_angle;
  MatrixXd bs_bs_distance;  // (M, M), zero diagonal
  MatrixXd bs_bs_angle;     // (m, m'): bearing of m' seen from m; zero diagonal
  MatrixXd user_target_distance;  // (K, J+1)

  int num_bs() const { return static_cast<int>(bs_positions.size()); }
  int num_users() const { return static_cast<int>(user_positions.size()); }
  int num_targets() const { return static_cast<int>(target_positions.size()); }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Minimum separation between any two points of a scenario.
inline constexpr double kGuardDistance = 1.0;
inline constexpr int kMaxScenarioRedraws = 1000;

/// Draws one point of the random population (users, then targets).
using PointSampler = std::function<Point2(std::mt19937_64&)>;

/// Cell centers: two cells on a line, otherwise a regular polygon with side
/// 2 * radius centred on the origin (an equilateral triangle for M = 3).
std::vector<Point2> cell_centers(int num_bs, double cell_radius);

/// Uniform sampler over the union of the cell disks.
PointSampler uniform_cell_sampler(const std::vector<Point2>& centers, double cell_radius);

/// Bearing of q seen from p relative to an array whose broadside points along
/// `array_orientation`. A uniform linear array cannot tell front from back, so
/// bearings behind the array are mirrored onto the front half-plane
/// (beta -> pi - beta), which keeps sin(beta) and therefore the steering
/// vector unchanged. Result in [-pi/2, pi/2], counter-clockwise positive.
double angle_between(const Point2& p, const Point2& q, double array_orientation);

/// Fills every distance and angle table from the positions.
void populate_tables(Scenario& s);

/// Throws std::runtime_error after kMaxScenarioRedraws rejected draws.
Scenario generate_scenario(const SystemConfig& config, std::uint64_t seed);
Scenario generate_scenario(const SystemConfig& config, std::uint64_t seed,
                           const PointSampler& sampler);

}  // namespace misac
