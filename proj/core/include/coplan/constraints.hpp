#pragma once

#include <memory>
#include <string>
#include <vector>

#include "coplan/geometry.hpp"
#include "coplan/types.hpp"

namespace coplan::constraints {

enum class BlockKind {
  co_observation,
  velocity,
  obstacle,
  workspace,
  reach_point,
  reach_plane,
  reach_segment,
  reach_polygon,
};

// Scheduled proximity requirement between two sub-teams.
struct CoObservationEvent {
  int robot_a = 0;
  int robot_b = 0;
  int time = 0;      // step index in 0..T
  double d_max = 0;  // proximity radius
};

struct BlockEval {
  Eigen::VectorXd value;
  bool infeasible = false;  // reachability ellipsoid could not be built here
};

// One constraint in splitting form: a map D over selected waypoints, the
// projection onto its feasible set Z, and the adjoint of D's differential.
// Blocks are immutable after construction and safe to evaluate concurrently.
class ConstraintBlock {
 public:
  virtual ~ConstraintBlock() = default;

  BlockKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  int output_dim() const { return output_dim_; }

  virtual BlockEval evaluate(const Trajectories& q) const = 0;

  // Metric projection onto Z; idempotent.
  virtual Eigen::VectorXd project(const Eigen::VectorXd& z) const = 0;

  // Adds J(q)^T w into grad (same row layout as q.raw()). Kinks use the
  // active branch; degenerate configurations contribute zero.
  virtual void accumulate_gradient(const Trajectories& q, const Eigen::VectorXd& w,
                                   Trajectories::Storage& grad) const = 0;

 protected:
  ConstraintBlock(BlockKind kind, std::string label, int output_dim)
      : kind_(kind), label_(std::move(label)), output_dim_(output_dim) {}

 private:
  BlockKind kind_;
  std::string label_;
  int output_dim_;
};

using BlockPtr = std::unique_ptr<ConstraintBlock>;

// D = q_b(t) - q_a(t), Z = ball of radius d_max.
BlockPtr co_observation_block(const CoObservationEvent& event, int dim);

// D = q(step+1) - q(step), Z = ball of radius v_max.
BlockPtr velocity_block(int robot, int step, double v_max, int dim);

// D = q(step), Z = complement of the polygon; interior points project to the
// nearest boundary point (ties toward the smallest edge index).
BlockPtr obstacle_block(int robot, int step, geometry::ConvexPolygon poly, int dim,
                        std::string label = "");

// D = q(step), Z = axis box [lo, hi]; componentwise clamp.
BlockPtr workspace_block(int robot, int step, const Vec3& lo, const Vec3& hi, int dim);

// Reachability blocks: D evaluates the named geometry constraint on the
// ellipsoid spanned by the waypoints at t_i and t_j; Z = {0}. A construction
// failure (waypoints too far apart for v_max) evaluates to zero with the
// infeasible flag set instead of aborting the solve.
BlockPtr reach_point_block(int robot, int t_i, int t_j, double v_max, const Vec3& avoid, int dim,
                           std::string label = "");
BlockPtr reach_plane_block(int robot, int t_i, int t_j, double v_max,
                           const geometry::Hyperplane& plane, int dim, std::string label = "");
BlockPtr reach_segment_block(int robot, int t_i, int t_j, double v_max, const Vec3& p1,
                             const Vec3& p2, int dim, std::string label = "");
BlockPtr reach_polygon_block(int robot, int t_i, int t_j, double v_max,
                             geometry::ConvexPolygon region, int dim, std::string label = "");

}  // namespace coplan::constraints
