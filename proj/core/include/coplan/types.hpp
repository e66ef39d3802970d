#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace coplan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Base for all recoverable errors raised by the toolkit.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct AntipodalInputs : Error {
  using Error::Error;
};
struct InfeasibleVelocity : Error {
  using Error::Error;
};
struct DegenerateConfiguration : Error {
  using Error::Error;
};
struct BoundaryCase : Error {
  using Error::Error;
};
struct DegenerateSegment : Error {
  using Error::Error;
};

// rrt
struct RootInCollision : Error {
  using Error::Error;
};

// checkpoint graph
struct NoSecurePartition : Error {
  using Error::Error;
};

// flow
struct WeightOrderViolation : Error {
  using Error::Error;
};
struct RhoTooLarge : Error {
  RhoTooLarge(const std::string& msg, double admissible) : Error(msg), bound(admissible) {}
  double bound;  // largest admissible rho: 1 / W*
};
struct FlowInfeasible : Error {
  using Error::Error;
};

// scenario io
struct ParseError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  ValidationError(const std::string& which, const std::string& why)
      : Error(which + ": " + why), field(which), reason(why) {}
  std::string field;
  std::string reason;
};

// Waypoint sequences for every sub-team over the discrete horizon 0..T.
// Row (robot * (T+1) + t) holds the waypoint of `robot` at time t.
class Trajectories {
 public:
  // row-major so a waypoint row is contiguous
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Trajectories() = default;
  Trajectories(int robots, int horizon, int dim) : robots_(robots), horizon_(horizon), dim_(dim) {
    if (robots < 1 || horizon < 1 || (dim != 2 && dim != 3))
      throw ValidationError("trajectories", "need robots >= 1, T >= 1, dim in {2,3}");
    data_ = Storage::Zero(static_cast<Eigen::Index>(robots) * (horizon + 1), dim);
  }

  int robots() const { return robots_; }
  int horizon() const { return horizon_; }  // T; times run 0..T
  int dim() const { return dim_; }
  int waypoints_per_robot() const { return horizon_ + 1; }

  Eigen::Ref<Eigen::RowVectorXd> at(int robot, int t) { return data_.row(index(robot, t)); }
  Eigen::Ref<const Eigen::RowVectorXd> at(int robot, int t) const {
    return data_.row(index(robot, t));
  }

  // Waypoint embedded in 3-D (third coordinate 0 for planar data).
  Vec3 at3(int robot, int t) const {
    Vec3 p = Vec3::Zero();
    p.head(dim_) = data_.row(index(robot, t)).transpose();
    return p;
  }
  void set(int robot, int t, const Eigen::VectorXd& p) { data_.row(index(robot, t)) = p.transpose(); }

  Storage& raw() { return data_; }
  const Storage& raw() const { return data_; }

  Eigen::Index index(int robot, int t) const {
    return static_cast<Eigen::Index>(robot) * (horizon_ + 1) + t;
  }

 private:
  int robots_ = 0;
  int horizon_ = 0;
  int dim_ = 0;
  Storage data_;
};

}  // namespace coplan
