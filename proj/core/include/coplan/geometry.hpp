#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "coplan/types.hpp"

namespace coplan::geometry {

// Hyperplane {q : normal . q = offset} with unit normal.
struct Hyperplane {
  Vec3 normal = Vec3::UnitX();
  double offset = 0.0;
};

// Convex polygon in the z = 0 plane, vertices ordered counter-clockwise.
// In 3-D contexts the polygon is interpreted as the xy-region (prism).
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Vec3> vertices);

  int size() const { return static_cast<int>(vertices_.size()); }
  const std::vector<Vec3>& vertices() const { return vertices_; }
  std::pair<Vec3, Vec3> edge(int i) const;  // (v_i, v_{i+1 mod n})

  // Boundary counts as inside.
  bool contains(const Vec3& p) const;
  // Nearest point on the boundary; ties broken toward the smallest edge index.
  Vec3 nearest_boundary_point(const Vec3& p, int* edge_index = nullptr) const;
  // True when the segment [p, q] touches the polygon (boundary inclusive).
  bool segment_intersects(const Vec3& p, const Vec3& q) const;

 private:
  std::vector<Vec3> vertices_;
};

// Ellipsoidal over-approximation of the set reachable between two timed
// waypoints under a speed cap. Canonical frame: center at the origin,
// major axis along +x, quadric diag(a^-2, b^-2, b^-2).
class ReachabilityEllipsoid {
 public:
  // rotation maps canonical coordinates to global ones; coincident foci get
  // the identity. Throws InfeasibleVelocity when a <= c + 1e-9 * a.
  static ReachabilityEllipsoid from_waypoints(const Vec3& q1, const Vec3& q2, int t1, int t2,
                                              double v_max);
  // Axis-aligned ellipsoid with identity rotation (test fixtures).
  static ReachabilityEllipsoid axis_aligned(double a, double b, const Vec3& center = Vec3::Zero());

  const Vec3& focus1() const { return focus1_; }
  const Vec3& focus2() const { return focus2_; }
  int t1() const { return t1_; }
  int t2() const { return t2_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  const Vec3& center() const { return center_; }
  const Mat3& rotation() const { return rotation_; }

  Vec3 to_canonical(const Vec3& global) const { return rotation_.transpose() * (global - center_); }
  Vec3 from_canonical(const Vec3& canonical) const { return rotation_ * canonical + center_; }

  // q^T Q q - 1 in the canonical frame; < -1e-12 means strictly inside.
  double level(const Vec3& global) const;
  bool strictly_inside(const Vec3& global) const { return level(global) < -1e-12; }

 private:
  ReachabilityEllipsoid() = default;
  Vec3 focus1_, focus2_, center_;
  int t1_ = 0, t2_ = 1;
  double a_ = 0, b_ = 0, c_ = 0;
  Mat3 rotation_ = Mat3::Identity();
};

// Rotation mapping nu_F to nu_E (unit inputs). Involutory and symmetric.
// Antipodal inputs fall back to the pi-rotation about the deterministic axis
// orthogonal to nu_F derived from the smallest-index canonical axis.
Mat3 householder(const Vec3& nu_F, const Vec3& nu_E);

// Rate of the rotation when nu_F moves with rate nu_F_rate and nu_E is held
// fixed. Throws AntipodalInputs near nu_F = -nu_E where the map is singular.
Mat3 householder_differential(const Vec3& nu_F, const Vec3& nu_E, const Vec3& nu_F_rate);

struct PointProjection {
  Vec3 violation = Vec3::Zero();       // boundary point minus avoid point; zero outside
  bool inside = false;                 // strict interior test (level < -1e-12)
  Vec3 boundary_point = Vec3::Zero();  // nearest boundary point (equals q_avoid outside)
};

// Nearest boundary point for points inside the ellipsoid. Ties on the major
// axis prefer positive second, then positive third canonical coordinate.
PointProjection point_projection(const ReachabilityEllipsoid& e, const Vec3& q_avoid);

// 3x6 Jacobians mapping stacked foci rates (q1dot; q2dot) to violation rates.
// Derived by chaining the rotation differential through the construction;
// they assume the from_waypoints rotation convention.
using FociJacobian = Eigen::Matrix<double, 3, 6>;

// Throws DegenerateConfiguration when q_avoid sits within 1e-6 of the center
// line while the axis tie is active. Returns zeros for exterior points.
FociJacobian point_projection_differential(const ReachabilityEllipsoid& e, const Vec3& q_avoid);

struct PlaneTangency {
  double d_E = 0;   // plane offset in the canonical frame
  double d_Et = 0;  // tangent threshold sqrt(n_E^T Q^-1 n_E)
  Vec3 p_t1 = Vec3::Zero(), p_t2 = Vec3::Zero();  // tangent points (canonical)
  Vec3 p_L = Vec3::Zero();                        // closest point of the plane (canonical)
};

PlaneTangency plane_tangency(const ReachabilityEllipsoid& e, const Hyperplane& plane);

// Global-frame displacement p_t - p_L for the active side, zero when the
// plane clears the ellipsoid (|d_E| > d_Et).
Vec3 plane_constraint_value(const ReachabilityEllipsoid& e, const Hyperplane& plane);

// strict=true throws BoundaryCase when |d_E| is within 1e-8 of 0 or d_Et;
// strict=false evaluates the active branch (subgradient choice at kinks).
FociJacobian plane_constraint_differential(const ReachabilityEllipsoid& e, const Hyperplane& plane,
                                           bool strict = true);

// Supporting hyperplane used by the segment constraint: contains the segment
// line, normal points from the ellipsoid center toward the line (in-plane
// perpendicular for planar data). Throws DegenerateSegment for ~zero length.
Hyperplane segment_supporting_plane(const ReachabilityEllipsoid& e, const Vec3& p1, const Vec3& p2);

// Case split: plane constraint when the plane's closest point p_L falls
// within the segment, point constraint at the endpoint nearest p_L otherwise.
Vec3 segment_constraint_value(const ReachabilityEllipsoid& e, const Vec3& p1, const Vec3& p2);
FociJacobian segment_constraint_differential(const ReachabilityEllipsoid& e, const Vec3& p1,
                                             const Vec3& p2, bool strict = true);

// Vertical stack of segment constraints over the polygon's edges (3 rows per
// edge). A polygon fully containing the ellipsoid can stack to zero; pair
// with a waypoint obstacle constraint.
Eigen::VectorXd polygon_constraint_value(const ReachabilityEllipsoid& e, const ConvexPolygon& poly);
Eigen::MatrixXd polygon_constraint_differential(const ReachabilityEllipsoid& e,
                                                const ConvexPolygon& poly, bool strict = true);

// Verification predicate: nonzero polygon stack, any vertex inside the
// ellipsoid, or the ellipsoid center inside the polygon.
bool ellipsoid_region_intersects(const ReachabilityEllipsoid& e, const ConvexPolygon& poly);

}  // namespace coplan::geometry
