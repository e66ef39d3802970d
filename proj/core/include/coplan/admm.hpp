#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "coplan/constraints.hpp"
#include "coplan/types.hpp"

namespace coplan::admm {

struct AdmmParams {
  double rho = 1.0;
  double eps_pri = 1e-3;
  double eps_dual = 1e-3;
  int max_iter = 500;
  int inner_budget = 50;      // quasi-Newton iterations per primal update
  bool pin_endpoints = true;  // keep every robot's first and last waypoint fixed
};

// Differentiable part of the problem; the splitting handles everything else.
struct SmoothObjective {
  std::function<double(const Trajectories&)> value;
  std::function<std::pair<double, Trajectories::Storage>(const Trajectories&)> value_and_gradient;

  static SmoothObjective zero();
};

enum class SolveStatus { converged, diverged };

struct BlockReport {
  std::string label;
  double violation = 0;     // ||D - Pi_Z(D)|| at the final iterate
  bool infeasible = false;  // the block saw an unreachable waypoint pair
};

struct AdmmResult {
  Trajectories trajectories;
  SolveStatus status = SolveStatus::diverged;
  int iterations = 0;
  int residual_dim = 0;                // stacked size of all block outputs
  std::vector<double> primal_history;  // per-iteration residual norms
  std::vector<double> dual_history;
  std::vector<BlockReport> blocks;  // per-block violations at the final iterate
  int line_search_stalls = 0;
  bool any_infeasible = false;
};

// Straight-line interpolation between per-robot endpoints; the standard
// initial guess.
Trajectories straight_line(const std::vector<Vec3>& starts, const std::vector<Vec3>& goals,
                           int horizon, int dim);

// Stacked block values in declaration order (the copy-variable layout).
Eigen::VectorXd stacked_values(const std::vector<constraints::BlockPtr>& blocks,
                               const Trajectories& q, bool* any_infeasible = nullptr);

// One monotone inner minimization of
//   objective(q) + (rho/2) * || D(q) - z + u ||^2
// by limited-memory quasi-Newton with backtracking; never returns a worse
// iterate than the input. A failed line search increments *stall_count and
// returns the best point found.
Trajectories q_update(const Trajectories& q, const SmoothObjective& objective,
                      const std::vector<constraints::BlockPtr>& blocks, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& u, double rho, int budget, bool pin_endpoints,
                      int* stall_count = nullptr);

struct Residuals {
  double primal = 0;  // || D(q) - z ||
  double dual = 0;    // || -rho * (z - z_prev) ||
};

Residuals residuals(const Eigen::VectorXd& dq, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& z_prev, double rho);

// Alternating iteration over the splitting until both residual norms fall
// below eps * sqrt(dim) or max_iter is exhausted (then status = diverged;
// the caller decides what failure means). Deterministic.
AdmmResult solve(const Trajectories& initial, const SmoothObjective& objective,
                 const std::vector<constraints::BlockPtr>& blocks, const AdmmParams& params);

}  // namespace coplan::admm
