#include "misac/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace misac {

std::vector<Point2> cell_centers(int num_bs, double cell_radius) {
  std::vector<Point2> centers;
  if (num_bs == 2) {
    centers.push_back({-cell_radius, 0.0});
    centers.push_back({cell_radius, 0.0});
    return centers;
  }
  // Side 2R gives adjacent, non-overlapping cells.
  const double circumradius = cell_radius / std::sin(kPi / num_bs);
  for (int m = 0; m < num_bs; ++m) {
    const double phi = kPi / 2.0 + 2.0 * kPi * m / num_bs;
    centers.push_back({circumradius * std::cos(phi), circumradius * std::sin(phi)});
  }
  return centers;
}

PointSampler uniform_cell_sampler(const std::vector<Point2>& centers, double cell_radius) {
  double xmin = centers.front().x, xmax = xmin, ymin = centers.front().y, ymax = ymin;
  for (const auto& c : centers) {
    xmin = std::min(xmin, c.x);
    xmax = std::max(xmax, c.x);
    ymin = std::min(ymin, c.y);
    ymax = std::max(ymax, c.y);
  }
  xmin -= cell_radius;
  xmax += cell_radius;
  ymin -= cell_radius;
  ymax += cell_radius;
  return [=](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(xmin, xmax), uy(ymin, ymax);
    for (;;) {
      const Point2 p{ux(rng), uy(rng)};
      for (const auto& c : centers) {
        if (distance(p, c) <= cell_radius) return p;
      }
    }
  };
}

double angle_between(const Point2& p, const Point2& q, double array_orientation) {
  if (p == q) throw std::invalid_argument("angle_between: coincident points");
  double beta = std::atan2(q.y - p.y, q.x - p.x) - array_orientation;
  beta = std::remainder(beta, 2.0 * kPi);  // (-pi, pi]
  if (beta > kPi / 2.0) beta = kPi - beta;
  if (beta < -kPi / 2.0) beta = -kPi - beta;
  return beta;
}

void populate_tables(Scenario& s) {
  const int M = s.num_bs(), K = s.num_users(), T = s.num_targets();
  s.bs_target_distance.resize(M, T);
  s.bs_target_angle.resize(M, T);
  s.bs_user_distance.resize(M, K);
  s.bs_user_angle.resize(M, K);
  s.bs_bs_distance = MatrixXd::Zero(M, M);
  s.bs_bs_angle = MatrixXd::Zero(M, M);
  s.user_target_distance.resize(K, T);
  for (int m = 0; m < M; ++m) {
    const Point2& b = s.bs_positions[m];
    const double o = s.bs_orientation[m];
    for (int j = 0; j < T; ++j) {
      s.bs_target_distance(m, j) = distance(b, s.target_positions[j]);
      s.bs_target_angle(m, j) = angle_between(b, s.target_positions[j], o);
    }
    for (int k = 0; k < K; ++k) {
      s.bs_user_distance(m, k) = distance(b, s.user_positions[k]);
      s.bs_user_angle(m, k) = angle_between(b, s.user_positions[k], o);
    }
    for (int n = 0; n < M; ++n) {
      if (n == m) continue;
      s.bs_bs_distance(m, n) = distance(b, s.bs_positions[n]);
      s.bs_bs_angle(m, n) = angle_between(b, s.bs_positions[n], o);
    }
  }
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < T; ++j) {
      s.user_target_distance(k, j) = distance(s.user_positions[k], s.target_positions[j]);
    }
  }
}

namespace {

bool well_separated(const Scenario& s) {
  std::vector<Point2> all = s.bs_positions;
  all.insert(all.end(), s.user_positions.begin(), s.user_positions.end());
  all.insert(all.end(), s.target_positions.begin(), s.target_positions.end());
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      if (distance(all[a], all[b]) < kGuardDistance) return false;
    }
  }
  return true;
}

}  // namespace

Scenario generate_scenario(const SystemConfig& config, std::uint64_t seed) {
  const auto centers = cell_centers(config.num_bs, config.cell_radius);
  return generate_scenario(config, seed, uniform_cell_sampler(centers, config.cell_radius));
}

Scenario generate_scenario(const SystemConfig& config, std::uint64_t seed,
                           const PointSampler& sampler) {
  config.validate();
  Scenario s;
  s.cell_radius = config.cell_radius;
  s.bs_positions = cell_centers(config.num_bs, config.cell_radius);
  Point2 centroid;
  for (const auto& b : s.bs_positions) {
    centroid.x += b.x / config.num_bs;
    centroid.y += b.y / config.num_bs;
  }
  for (const auto& b : s.bs_positions) {
    s.bs_orientation.push_back(std::atan2(centroid.y - b.y, centroid.x - b.x));
  }

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < kMaxScenarioRedraws; ++attempt) {
    s.user_positions.clear();
    s.target_positions.clear();
    for (int k = 0; k < config.num_users; ++k) s.user_positions.push_back(sampler(rng));
    for (int j = 0; j < config.num_targets(); ++j) s.target_positions.push_back(sampler(rng));
    if (well_separated(s)) {
      populate_tables(s);
      return s;
    }
  }
  throw std::runtime_error("generate_scenario: degenerate geometry after bounded redraws");
}

}  // namespace misac
