#include "coplan/constraints.hpp"

#include <cmath>
#include <utility>

namespace coplan::constraints {

namespace {

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw ValidationError("block", "dim must be 2 or 3");
}

void check_selector(const Trajectories& q, int robot, int time) {
  if (robot < 0 || robot >= q.robots() || time < 0 || time > q.horizon())
    throw ValidationError("block", "selector outside the trajectory index range");
}

Vec3 embed(const Eigen::VectorXd& v, int dim) {
  Vec3 p = Vec3::Zero();
  p.head(dim) = v.head(dim);
  return p;
}

Eigen::VectorXd clip_to_ball(const Eigen::VectorXd& z, double radius) {
  double n = z.norm();
  if (n <= radius) return z;
  return z * (radius / n);
}

class CoObservationBlock final : public ConstraintBlock {
 public:
  CoObservationBlock(const CoObservationEvent& e, int dim)
      : ConstraintBlock(BlockKind::co_observation,
                        "coobs[a=" + std::to_string(e.robot_a) + ",b=" + std::to_string(e.robot_b) +
                            ",t=" + std::to_string(e.time) + "]",
                        dim),
        event_(e),
        dim_(dim) {
    check_dim(dim);
    if (e.robot_a == e.robot_b) throw ValidationError("coobs", "robots must differ");
    if (e.d_max <= 0) throw ValidationError("coobs", "d_max must be positive");
    if (e.time < 0) throw ValidationError("coobs", "time must be nonnegative");
  }

  BlockEval evaluate(const Trajectories& q) const override {
    check_selector(q, event_.robot_a, event_.time);
    check_selector(q, event_.robot_b, event_.time);
    return {(q.at(event_.robot_b, event_.time) - q.at(event_.robot_a, event_.time)).transpose(),
            false};
  }

  Eigen::VectorXd project(const Eigen::VectorXd& z) const override {
    return clip_to_ball(z, event_.d_max);
  }

  void accumulate_gradient(const Trajectories& q, const Eigen::VectorXd& w,
                           Trajectories::Storage& grad) const override {
    grad.row(q.index(event_.robot_b, event_.time)) += w.transpose();
    grad.row(q.index(event_.robot_a, event_.time)) -= w.transpose();
  }

 private:
  CoObservationEvent event_;
  int dim_;
};

class VelocityBlock final : public ConstraintBlock {
 public:
  VelocityBlock(int robot, int step, double v_max, int dim)
      : ConstraintBlock(BlockKind::velocity,
                        "vel[r=" + std::to_string(robot) + ",t=" + std::to_string(step) + "]", dim),
        robot_(robot),
        step_(step),
        v_max_(v_max) {
    check_dim(dim);
    if (v_max <= 0) throw ValidationError("velocity", "v_max must be positive");
    if (step < 0) throw ValidationError("velocity", "step must be nonnegative");
  }

  BlockEval evaluate(const Trajectories& q) const override {
    check_selector(q, robot_, step_ + 1);
    return {(q.at(robot_, step_ + 1) - q.at(robot_, step_)).transpose(), false};
  }

  Eigen::VectorXd project(const Eigen::VectorXd& z) const override {
    return clip_to_ball(z, v_max_);
  }

  void accumulate_gradient(const Trajectories& q, const Eigen::VectorXd& w,
                           Trajectories::Storage& grad) const override {
    grad.row(q.index(robot_, step_ + 1)) += w.transpose();
    grad.row(q.index(robot_, step_)) -= w.transpose();
  }

 private:
  int robot_, step_;
  double v_max_;
};

class ObstacleBlock final : public ConstraintBlock {
 public:
  ObstacleBlock(int robot, int step, geometry::ConvexPolygon poly, int dim, std::string label)
      : ConstraintBlock(
            BlockKind::obstacle,
            label.empty() ? "obstacle[r=" + std::to_string(robot) + ",t=" + std::to_string(step) + "]"
                          : std::move(label),
            dim),
        robot_(robot),
        step_(step),
        poly_(std::move(poly)),
        dim_(dim) {
    check_dim(dim);
    if (step < 0) throw ValidationError("obstacle", "step must be nonnegative");
  }

  BlockEval evaluate(const Trajectories& q) const override {
    check_selector(q, robot_, step_);
    return {q.at(robot_, step_).transpose(), false};
  }

  Eigen::VectorXd project(const Eigen::VectorXd& z) const override {
    Vec3 p = embed(z, dim_);
    Vec3 planar(p.x(), p.y(), 0);  // the region is a vertical prism
    if (!poly_.contains(planar)) return z;
    Vec3 b = poly_.nearest_boundary_point(planar);
    Eigen::VectorXd out = z;
    out[0] = b.x();
    out[1] = b.y();
    return out;
  }

  void accumulate_gradient(const Trajectories& q, const Eigen::VectorXd& w,
                           Trajectories::Storage& grad) const override {
    grad.row(q.index(robot_, step_)) += w.transpose();
  }

 private:
  int robot_, step_;
  geometry::ConvexPolygon poly_;
  int dim_;
};

class WorkspaceBlock final : public ConstraintBlock {
 public:
  WorkspaceBlock(int robot, int step, const Vec3& lo, const Vec3& hi, int dim)
      : ConstraintBlock(BlockKind::workspace,
                        "workspace[r=" + std::to_string(robot) + ",t=" + std::to_string(step) + "]",
                        dim),
        robot_(robot),
        step_(step),
        lo_(lo),
        hi_(hi) {
    check_dim(dim);
    for (int i = 0; i < dim; ++i)
      if (!(lo[i] < hi[i])) throw ValidationError("workspace", "box must have positive extent");
  }

  BlockEval evaluate(const Trajectories& q) const override {
    check_selector(q, robot_, step_);
    return {q.at(robot_, step_).transpose(), false};
  }

  Eigen::VectorXd project(const Eigen::VectorXd& z) const override {
    Eigen::VectorXd out = z;
    for (int i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lo_[i], hi_[i]);
    return out;
  }

  void accumulate_gradient(const Trajectories& q, const Eigen::VectorXd& w,
                           Trajectories::Storage& grad) const override {
    grad.row(q.index(robot_, step_)) += w.transpose();
  }

 private:
  int robot_, step_;
  Vec3 lo_, hi_;
};

// Shared base for the reachability family: owns the foci selector, builds the
// ellipsoid per evaluation, and scatters the 3x6 foci Jacobian to waypoints.
class ReachBlock : public ConstraintBlock {
 protected:
  ReachBlock(BlockKind kind, std::string label, int output_dim, int robot, int t_i, int t_j,
             double v_max, int dim)
      : ConstraintBlock(kind, std::move(label), output_dim),
        robot_(robot),
        t_i_(t_i),
        t_j_(t_j),
        v_max_(v_max),
        dim_(dim) {
    check_dim(dim);
    if (t_i >= t_j) throw ValidationError("reach", "need t_i < t_j");
    if (v_max <= 0) throw ValidationError("reach", "v_max must be positive");
  }

  // Geometry evaluated on the ellipsoid; rows beyond dim_ are dropped.
  virtual Eigen::VectorXd region_value(const geometry::ReachabilityEllipsoid& e) const = 0;
  virtual Eigen::MatrixXd region_differential(const geometry::ReachabilityEllipsoid& e) const = 0;
  virtual int full_rows() const = 0;  // 3-D row count before dim reduction

 public:
  BlockEval evaluate(const Trajectories& q) const override {
    check_selector(q, robot_, t_i_);
    check_selector(q, robot_, t_j_);
    BlockEval out;
    out.value = Eigen::VectorXd::Zero(output_dim());
    try {
      auto e = geometry::ReachabilityEllipsoid::from_waypoints(q.at3(robot_, t_i_),
                                                               q.at3(robot_, t_j_), t_i_, t_j_,
                                                               v_max_);
      Eigen::VectorXd full = region_value(e);
      for (int g = 0; g * 3 < full.size(); ++g)
        out.value.segment(g * dim_, dim_) = full.segment(g * 3, dim_);
    } catch (const InfeasibleVelocity&) {
      out.infeasible = true;
    }
    return out;
  }

  Eigen::VectorXd project(const Eigen::VectorXd& z) const override {
    return Eigen::VectorXd::Zero(z.size());
  }

  void accumulate_gradient(const Trajectories& q, const Eigen::VectorXd& w,
                           Trajectories::Storage& grad) const override {
    Eigen::MatrixXd jac;  // full_rows x 6
    try {
      auto e = geometry::ReachabilityEllipsoid::from_waypoints(q.at3(robot_, t_i_),
                                                               q.at3(robot_, t_j_), t_i_, t_j_,
                                                               v_max_);
      jac = region_differential(e);
    } catch (const Error&) {
      return;  // infeasible or degenerate: zero contribution
    }
    Eigen::VectorXd w3 = Eigen::VectorXd::Zero(full_rows());
    for (int g = 0; g * 3 < full_rows(); ++g) w3.segment(g * 3, dim_) = w.segment(g * dim_, dim_);
    Vec6 jtw = jac.transpose() * w3;
    grad.row(q.index(robot_, t_i_)) += jtw.head(dim_).transpose();
    grad.row(q.index(robot_, t_j_)) += jtw.segment(3, dim_).transpose();
  }

 protected:
  int robot_, t_i_, t_j_;
  double v_max_;
  int dim_;
};

class ReachPointBlock final : public ReachBlock {
 public:
  ReachPointBlock(int robot, int t_i, int t_j, double v_max, const Vec3& avoid, int dim,
                  std::string label)
      : ReachBlock(BlockKind::reach_point,
                   label.empty() ? "reach_point[r=" + std::to_string(robot) + "," +
                                       std::to_string(t_i) + "-" + std::to_string(t_j) + "]"
                                 : std::move(label),
                   dim, robot, t_i, t_j, v_max, dim),
        avoid_(avoid) {}

  Eigen::VectorXd region_value(const geometry::ReachabilityEllipsoid& e) const override {
    return geometry::point_projection(e, avoid_).violation;
  }
  Eigen::MatrixXd region_differential(const geometry::ReachabilityEllipsoid& e) const override {
    return geometry::point_projection_differential(e, avoid_);
  }
  int full_rows() const override { return 3; }

 private:
  Vec3 avoid_;
};

class ReachPlaneBlock final : public ReachBlock {
 public:
  ReachPlaneBlock(int robot, int t_i, int t_j, double v_max, const geometry::Hyperplane& plane,
                  int dim, std::string label)
      : ReachBlock(BlockKind::reach_plane,
                   label.empty() ? "reach_plane[r=" + std::to_string(robot) + "," +
                                       std::to_string(t_i) + "-" + std::to_string(t_j) + "]"
                                 : std::move(label),
                   dim, robot, t_i, t_j, v_max, dim),
        plane_(plane) {}

  Eigen::VectorXd region_value(const geometry::ReachabilityEllipsoid& e) const override {
    return geometry::plane_constraint_value(e, plane_);
  }
  Eigen::MatrixXd region_differential(const geometry::ReachabilityEllipsoid& e) const override {
    return geometry::plane_constraint_differential(e, plane_, /*strict=*/false);
  }
  int full_rows() const override { return 3; }

 private:
  geometry::Hyperplane plane_;
};

class ReachSegmentBlock final : public ReachBlock {
 public:
  ReachSegmentBlock(int robot, int t_i, int t_j, double v_max, const Vec3& p1, const Vec3& p2,
                    int dim, std::string label)
      : ReachBlock(BlockKind::reach_segment,
                   label.empty() ? "reach_segment[r=" + std::to_string(robot) + "," +
                                       std::to_string(t_i) + "-" + std::to_string(t_j) + "]"
                                 : std::move(label),
                   dim, robot, t_i, t_j, v_max, dim),
        p1_(p1),
        p2_(p2) {}

  Eigen::VectorXd region_value(const geometry::ReachabilityEllipsoid& e) const override {
    return geometry::segment_constraint_value(e, p1_, p2_);
  }
  Eigen::MatrixXd region_differential(const geometry::ReachabilityEllipsoid& e) const override {
    return geometry::segment_constraint_differential(e, p1_, p2_, /*strict=*/false);
  }
  int full_rows() const override { return 3; }

 private:
  Vec3 p1_, p2_;
};

class ReachPolygonBlock final : public ReachBlock {
 public:
  ReachPolygonBlock(int robot, int t_i, int t_j, double v_max, geometry::ConvexPolygon region,
                    int dim, std::string label)
      : ReachBlock(BlockKind::reach_polygon,
                   label.empty() ? "reach_poly[r=" + std::to_string(robot) + "," +
                                       std::to_string(t_i) + "-" + std::to_string(t_j) + "]"
                                 : std::move(label),
                   dim * static_cast<int>(region.size()), robot, t_i, t_j, v_max, dim),
        region_(std::move(region)) {}

  Eigen::VectorXd region_value(const geometry::ReachabilityEllipsoid& e) const override {
    return geometry::polygon_constraint_value(e, region_);
  }
  Eigen::MatrixXd region_differential(const geometry::ReachabilityEllipsoid& e) const override {
    return geometry::polygon_constraint_differential(e, region_, /*strict=*/false);
  }
  int full_rows() const override { return 3 * region_.size(); }

 private:
  geometry::ConvexPolygon region_;
};

}  // namespace

BlockPtr co_observation_block(const CoObservationEvent& event, int dim) {
  return std::make_unique<CoObservationBlock>(event, dim);
}

BlockPtr velocity_block(int robot, int step, double v_max, int dim) {
  return std::make_unique<VelocityBlock>(robot, step, v_max, dim);
}

BlockPtr obstacle_block(int robot, int step, geometry::ConvexPolygon poly, int dim,
                        std::string label) {
  return std::make_unique<ObstacleBlock>(robot, step, std::move(poly), dim, std::move(label));
}

BlockPtr workspace_block(int robot, int step, const Vec3& lo, const Vec3& hi, int dim) {
  return std::make_unique<WorkspaceBlock>(robot, step, lo, hi, dim);
}

BlockPtr reach_point_block(int robot, int t_i, int t_j, double v_max, const Vec3& avoid, int dim,
                           std::string label) {
  return std::make_unique<ReachPointBlock>(robot, t_i, t_j, v_max, avoid, dim, std::move(label));
}

BlockPtr reach_plane_block(int robot, int t_i, int t_j, double v_max,
                           const geometry::Hyperplane& plane, int dim, std::string label) {
  return std::make_unique<ReachPlaneBlock>(robot, t_i, t_j, v_max, plane, dim, std::move(label));
}

BlockPtr reach_segment_block(int robot, int t_i, int t_j, double v_max, const Vec3& p1,
                             const Vec3& p2, int dim, std::string label) {
  return std::make_unique<ReachSegmentBlock>(robot, t_i, t_j, v_max, p1, p2, dim,
                                             std::move(label));
}

BlockPtr reach_polygon_block(int robot, int t_i, int t_j, double v_max,
                             geometry::ConvexPolygon region, int dim, std::string label) {
  return std::make_unique<ReachPolygonBlock>(robot, t_i, t_j, v_max, std::move(region), dim,
                                             std::move(label));
}

}  // namespace coplan::constraints
