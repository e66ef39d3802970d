// Independent reference implementations used to validate the analytic code:
// finite differences for Jacobians, dense sampling for geometric predicates,
// exhaustive enumeration for small graph problems. Deliberately slow and
// simple so they can be trusted.
#pragma once

#include <coplan/geometry.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

using coplan::Vec3;
using coplan::geometry::ConvexPolygon;
using coplan::geometry::ReachabilityEllipsoid;

// Central-difference Jacobian of a vector map R^n -> R^m.
inline Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-6) {
  Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2 * h);
  }
  return jac;
}

// Worst relative column error between an analytic Jacobian and the
// finite-difference one, scaled by max(1, column norm).
inline double jacobian_mismatch(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& fd) {
  double worst = 0;
  for (int j = 0; j < fd.cols(); ++j) {
    double scale = std::max(1.0, fd.col(j).norm());
    worst = std::max(worst, (analytic.col(j) - fd.col(j)).norm() / scale);
  }
  return worst;
}

// Deterministic quasi-uniform directions on the sphere (Fibonacci lattice).
inline std::vector<Vec3> sphere_directions(int n) {
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double th = golden * i;
    dirs.emplace_back(r * std::cos(th), r * std::sin(th), z);
  }
  return dirs;
}

// Dense boundary sample of an ellipsoid (full 3-D surface).
inline std::vector<Vec3> boundary_samples(const ReachabilityEllipsoid& e, int n) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (const Vec3& d : sphere_directions(n)) {
    pts.push_back(e.from_canonical(Vec3(e.a() * d.x(), e.b() * d.y(), e.b() * d.z())));
  }
  return pts;
}

// Dense boundary sample of a planar ellipse cross-section (z = 0 canonical).
inline std::vector<Vec3> boundary_samples_2d(const ReachabilityEllipsoid& e, int n) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    double th = 2.0 * M_PI * i / n;
    pts.push_back(e.from_canonical(Vec3(e.a() * std::cos(th), e.b() * std::sin(th), 0)));
  }
  return pts;
}

// Nearest boundary point by dense sampling; pairs with point_projection.
inline Vec3 nearest_boundary_sampled(const ReachabilityEllipsoid& e, const Vec3& q, int n) {
  Vec3 best = Vec3::Zero();
  double best_d = std::numeric_limits<double>::infinity();
  for (const Vec3& p : boundary_samples(e, n)) {
    double d = (p - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

// Intersection test by dense sampling: any of n boundary points of the
// planar cross-section inside the polygon, any polygon vertex inside the
// ellipsoid, or containments either way (sampled). Margin reports how close
// the configuration is to the decision boundary so callers can skip ties.
struct SampledIntersection {
  bool intersects = false;
  double margin = 0;  // min |distance-like| witness observed
};

inline SampledIntersection sampled_region_intersection(const ReachabilityEllipsoid& e,
                                                       const ConvexPolygon& poly, int n) {
  SampledIntersection out;
  double closest = std::numeric_limits<double>::infinity();
  for (const Vec3& p : boundary_samples_2d(e, n)) {
    if (poly.contains(p)) {
      out.intersects = true;
      out.margin = 1;  // refined below by level probes
      break;
    }
    closest = std::min(closest, (poly.nearest_boundary_point(p) - p).norm());
  }
  if (!out.intersects) {
    // polygon fully inside? (edges never cross the boundary band)
    for (const Vec3& v : poly.vertices()) {
      if (e.strictly_inside(v)) {
        out.intersects = true;
        break;
      }
    }
  }
  if (!out.intersects && poly.contains(e.center())) out.intersects = true;
  if (!out.intersects) out.margin = closest;
  if (out.intersects) {
    // margin: deepest polygon-interior penetration of sampled boundary or
    // deepest vertex level inside
    double deepest = 0;
    for (const Vec3& p : boundary_samples_2d(e, n)) {
      if (poly.contains(p)) deepest = std::max(deepest, (poly.nearest_boundary_point(p) - p).norm());
    }
    for (const Vec3& v : poly.vertices()) {
      if (e.strictly_inside(v)) deepest = std::max(deepest, -e.level(v));
    }
    if (poly.contains(e.center())) deepest = std::max(deepest, 1.0);
    out.margin = deepest;
  }
  return out;
}

}  // namespace oracles
