#pragma once

#include <vector>

#include "coplan/types.hpp"

namespace coplan::objective {

// Field-uncertainty model: one scalar covariance per grid point, inflated by
// process noise each step and reduced by distance-weighted measurements from
// every robot. The planning objective is a smoothed maximum of the final
// covariances, so it is differentiable for the trajectory solver.
struct FieldGrid {
  std::vector<Vec3> points;
  double initial_covariance = 1.0;
  double process_noise = 0.01;  // per-step covariance inflation
  double sigma_meas = 1.0;      // base measurement standard deviation
  double ell = 1.0;             // RBF length scale of measurement quality

  // smoothing temperature for the max surrogate
  double temperature() const { return 0.05 * initial_covariance; }

  // nx-by-ny cell centers spanning [lo, hi] in the plane
  static FieldGrid regular(const Vec3& lo, const Vec3& hi, int nx, int ny);

  void validate() const;
};

// (1/sigma^2) * exp(-|q - point|^2 / (2 ell^2))
double information_gain(const Vec3& q, const Vec3& point, double sigma_meas, double ell);

// Final-time covariances after running every per-point filter over steps
// 1..T with all robots measuring each step.
Eigen::VectorXd propagate(const FieldGrid& grid, const Trajectories& q);

struct ObjectiveEval {
  double value = 0;
  Trajectories::Storage gradient;  // same row layout as Trajectories::raw()
};

// Smoothed maximum of the final covariances and its trajectory gradient
// (reverse accumulation through the filter recursion).
double objective_value(const FieldGrid& grid, const Trajectories& q);
ObjectiveEval objective_value_and_gradient(const FieldGrid& grid, const Trajectories& q);

}  // namespace coplan::objective
