#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "misac/conic/cone.hpp"
#include "misac/conic/problem.hpp"

namespace misac::test_support {

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

// Builds a problem whose optimum is known by construction: pick a
// complementary pair (s*, y*) from the Moreau decomposition of a random
// point, then choose b and c so that (x*, s*, y*) satisfies the KKT system.
struct PlantedProblem {
  conic::ConicProblem problem;
  double optimum = 0.0;
};

inline PlantedProblem planted(const std::vector<conic::Cone>& cones, int n, double density, int dense_rows,
                              std::uint64_t seed) {
  using conic::SparseMatrix;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const int m = conic::total_rows(cones);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < m; ++i) {
    const bool dense = i < dense_rows;
    for (int j = 0; j < n; ++j) {
      if (dense || ud(rng) < density) trips.emplace_back(i, j, nd(rng));
    }
  }
  // Every column needs an entry or the problem is unbounded in that direction.
  for (int j = 0; j < n; ++j) trips.emplace_back(j % m, j, 1.0 + ud(rng));
  SparseMatrix A(m, n);
  A.setFromTriplets(trips.begin(), trips.end());

  const Eigen::VectorXd z = random_vector(m, rng);
  Eigen::VectorXd s(m), y(m);
  int row = 0;
  for (const auto& cone : cones) {
    const int r = cone.rows();
    const Eigen::VectorXd zs = z.segment(row, r);
    s.segment(row, r) = conic::project(zs, cone);
    y.segment(row, r) = s.segment(row, r) - zs;
    row += r;
  }
  const Eigen::VectorXd x = random_vector(n, rng);
  PlantedProblem out;
  out.problem.A = A;
  out.problem.cones = cones;
  out.problem.b = A * x + s;
  out.problem.c = -(SparseMatrix(A.transpose()) * y);
  out.optimum = out.problem.c.dot(x);
  return out;
}

}  // namespace misac::test_support
