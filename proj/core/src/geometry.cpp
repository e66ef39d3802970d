#include "coplan/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace coplan::geometry {

namespace {

constexpr double kInsideTol = 1e-12;        // strict interior margin on the level set
constexpr double kDegenerateVel = 1e-9;     // relative slack for a > c
constexpr double kAxisTol = 1e-13;          // relative off-axis radius for closed forms
constexpr double kDegenerateLine = 1e-6;    // center-line distance for differential ties
constexpr double kBoundaryTol = 1e-8;       // plane case-split guard band
constexpr double kAntipodalTol = 1e-9;      // ||nu_F + nu_E|| threshold
constexpr double kRootTol = 1e-12;          // |F| target for the projection root
constexpr int kMaxRootIter = 200;
constexpr double kSegmentMin = 1e-9;

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Deterministic unit axis orthogonal to v: smallest-index canonical axis not
// parallel to v, projected onto v's orthogonal complement.
Vec3 orthogonal_axis(const Vec3& v) {
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Unit(k);
    if (e.cross(v).norm() > 1e-6) {
      Vec3 w = e - e.dot(v) * v;
      return w.normalized();
    }
  }
  return Vec3::UnitY();  // unreachable for unit v
}

double cross_z(const Vec3& a, const Vec3& b) { return a.x() * b.y() - a.y() * b.x(); }

Vec3 closest_point_on_segment(const Vec3& a, const Vec3& b, const Vec3& p) {
  Vec3 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

int orientation_sign(const Vec3& a, const Vec3& b, const Vec3& c) {
  double v = cross_z(b - a, c - a);
  if (v > 1e-12) return 1;
  if (v < -1e-12) return -1;
  return 0;
}

bool on_segment_collinear(const Vec3& a, const Vec3& b, const Vec3& p) {
  return std::min(a.x(), b.x()) - 1e-12 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
         std::min(a.y(), b.y()) - 1e-12 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-12;
}

bool segments_touch(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  int o1 = orientation_sign(a, b, c);
  int o2 = orientation_sign(a, b, d);
  int o3 = orientation_sign(c, d, a);
  int o4 = orientation_sign(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment_collinear(a, b, c)) return true;
  if (o2 == 0 && on_segment_collinear(a, b, d)) return true;
  if (o3 == 0 && on_segment_collinear(c, d, a)) return true;
  if (o4 == 0 && on_segment_collinear(c, d, b)) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvexPolygon

ConvexPolygon::ConvexPolygon(std::vector<Vec3> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw ValidationError("polygon", "needs at least 3 vertices");
  int n = size();
  double area2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3& a = vertices_[i];
    const Vec3& b = vertices_[(i + 1) % n];
    const Vec3& c = vertices_[(i + 2) % n];
    if ((b - a).head<2>().norm() < kSegmentMin)
      throw ValidationError("polygon", "zero-length edge");
    if (cross_z(b - a, c - b) < -1e-9) throw ValidationError("polygon", "not convex ccw");
    area2 += cross_z(a, b);
  }
  if (area2 <= 0.0) throw ValidationError("polygon", "not counter-clockwise");
}

std::pair<Vec3, Vec3> ConvexPolygon::edge(int i) const {
  return {vertices_[i], vertices_[(i + 1) % size()]};
}

bool ConvexPolygon::contains(const Vec3& p) const {
  int n = size();
  for (int i = 0; i < n; ++i) {
    const Vec3& a = vertices_[i];
    const Vec3& b = vertices_[(i + 1) % n];
    if (cross_z(b - a, p - a) < -1e-12) return false;
  }
  return true;
}

Vec3 ConvexPolygon::nearest_boundary_point(const Vec3& p, int* edge_index) const {
  int n = size();
  double best = std::numeric_limits<double>::infinity();
  Vec3 best_point = vertices_[0];
  int best_edge = 0;
  for (int i = 0; i < n; ++i) {
    Vec3 cand = closest_point_on_segment(vertices_[i], vertices_[(i + 1) % n], p);
    double d = (cand - p).squaredNorm();
    if (d < best) {  // strict: ties keep the smallest edge index
      best = d;
      best_point = cand;
      best_edge = i;
    }
  }
  if (edge_index) *edge_index = best_edge;
  return best_point;
}

bool ConvexPolygon::segment_intersects(const Vec3& p, const Vec3& q) const {
  if (contains(p) || contains(q)) return true;
  int n = size();
  for (int i = 0; i < n; ++i) {
    if (segments_touch(p, q, vertices_[i], vertices_[(i + 1) % n])) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// ReachabilityEllipsoid

ReachabilityEllipsoid ReachabilityEllipsoid::from_waypoints(const Vec3& q1, const Vec3& q2, int t1,
                                                            int t2, double v_max) {
  if (t2 <= t1) throw ValidationError("ellipsoid", "t2 must exceed t1");
  if (v_max <= 0) throw ValidationError("ellipsoid", "v_max must be positive");
  ReachabilityEllipsoid e;
  e.focus1_ = q1;
  e.focus2_ = q2;
  e.t1_ = t1;
  e.t2_ = t2;
  e.a_ = 0.5 * v_max * (t2 - t1);
  e.c_ = 0.5 * (q2 - q1).norm();
  if (e.a_ <= e.c_ + kDegenerateVel * e.a_)
    throw InfeasibleVelocity("waypoints separated by more than v_max * dt allows (a=" +
                             std::to_string(e.a_) + ", c=" + std::to_string(e.c_) + ")");
  e.b_ = std::sqrt(e.a_ * e.a_ - e.c_ * e.c_);
  e.center_ = 0.5 * (q1 + q2);
  if (e.c_ < 1e-15 * e.a_) {
    e.rotation_ = Mat3::Identity();
  } else {
    Vec3 nu_F = (q2 - q1) / (2.0 * e.c_);
    e.rotation_ = householder(nu_F, Vec3::UnitX());
  }
  return e;
}

ReachabilityEllipsoid ReachabilityEllipsoid::axis_aligned(double a, double b, const Vec3& center) {
  if (!(a > 0) || !(b > 0) || b > a)
    throw ValidationError("ellipsoid", "need 0 < b <= a for an axis-aligned ellipsoid");
  ReachabilityEllipsoid e;
  e.a_ = a;
  e.b_ = b;
  e.c_ = std::sqrt(std::max(0.0, a * a - b * b));
  e.center_ = center;
  e.focus1_ = center - e.c_ * Vec3::UnitX();
  e.focus2_ = center + e.c_ * Vec3::UnitX();
  e.t1_ = 0;
  e.t2_ = 1;
  e.rotation_ = Mat3::Identity();
  return e;
}

double ReachabilityEllipsoid::level(const Vec3& global) const {
  Vec3 q = to_canonical(global);
  double sx = q.x() / a_;
  double sy = q.y() / b_;
  double sz = q.z() / b_;
  return sx * sx + sy * sy + sz * sz - 1.0;
}

// ---------------------------------------------------------------------------
// Householder rotation and differential

Mat3 householder(const Vec3& nu_F, const Vec3& nu_E) {
  Vec3 up = nu_F + nu_E;
  double n = up.norm();
  if (n < kAntipodalTol) {
    Vec3 w = orthogonal_axis(nu_F);
    return 2.0 * w * w.transpose() - Mat3::Identity();
  }
  Vec3 u = up / n;
  return 2.0 * u * u.transpose() - Mat3::Identity();
}

Mat3 householder_differential(const Vec3& nu_F, const Vec3& nu_E, const Vec3& nu_F_rate) {
  Vec3 up = nu_F + nu_E;
  double n = up.norm();
  if (n < kAntipodalTol)
    throw AntipodalInputs("householder differential is singular for nu_F = -nu_E");
  Vec3 u = up / n;
  Mat3 h = 2.0 * u * u.transpose() - Mat3::Identity();
  Mat3 m = skew(u) * (Mat3::Identity() - u * u.transpose()) *
           (Mat3::Identity() - nu_F * nu_F.transpose()) / (n * nu_F.norm());
  return h * skew(-2.0 * m * nu_F_rate);
}

// ---------------------------------------------------------------------------
// Point projection

namespace {

// Root of (ax)^2/(sig+c2)^2 + (br)^2/sig^2 = 1 on (0, inf). Shifted variable
// sig = s + b^2 keeps full precision for near-axis interior points. The root
// is bracketed by [br, hypot(ax, br)].
double solve_sigma(double ax, double br, double c2) {
  double lo = br;
  double hi = std::hypot(ax, br);
  auto F = [&](double sig) {
    double fx = ax / (sig + c2);
    double fr = br / sig;
    return fx * fx + fr * fr - 1.0;
  };
  double flo = F(lo);
  if (std::abs(flo) <= kRootTol) return lo;
  double fhi = F(hi);
  if (std::abs(fhi) <= kRootTol) return hi;
  double sig = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxRootIter; ++it) {
    double fx = ax / (sig + c2);
    double fr = br / sig;
    double f = fx * fx + fr * fr - 1.0;
    if (std::abs(f) <= kRootTol) return sig;
    if (f > 0)
      lo = sig;
    else
      hi = sig;
    double dfds = -2.0 * (fx * fx / (sig + c2) + fr * fr / sig);
    double step = f / dfds;
    double next = sig - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // safeguard: bisect
    if (next == sig) break;
    sig = next;
  }
  return sig;
}

struct CanonicalProjection {
  enum Branch { kOutside, kGeneral, kVertex, kTie } branch = kOutside;
  Vec3 p = Vec3::Zero();  // canonical boundary point
  double sigma = 0.0;     // s + b^2 for the general/vertex branches
};

CanonicalProjection project_canonical(const Vec3& qt, double a, double b, double c) {
  CanonicalProjection out;
  double x = qt.x();
  double r = std::hypot(qt.y(), qt.z());
  double c2 = c * c;
  if (r <= kAxisTol * b) {
    if (a * std::abs(x) > c2) {
      out.branch = CanonicalProjection::kVertex;
      out.sigma = a * std::abs(x) - c2;
      out.p = Vec3(std::copysign(a, x), 0, 0);
    } else {
      out.branch = CanonicalProjection::kTie;
      double px = c2 > 0 ? a * a * x / c2 : 0.0;
      px = std::clamp(px, -a, a);
      double ryz = b * std::sqrt(std::max(0.0, 1.0 - px * px / (a * a)));
      out.p = Vec3(px, ryz, 0);  // prefer positive second canonical coordinate
    }
    return out;
  }
  out.branch = CanonicalProjection::kGeneral;
  out.sigma = solve_sigma(a * x, b * r, c2);
  out.p = Vec3(a * a * x / (out.sigma + c2), b * b * qt.y() / out.sigma,
               b * b * qt.z() / out.sigma);
  return out;
}

}  // namespace

PointProjection point_projection(const ReachabilityEllipsoid& e, const Vec3& q_avoid) {
  PointProjection out;
  out.boundary_point = q_avoid;
  if (e.level(q_avoid) >= -kInsideTol) return out;  // boundary counts as outside
  out.inside = true;
  CanonicalProjection cp = project_canonical(e.to_canonical(q_avoid), e.a(), e.b(), e.c());
  out.boundary_point = e.from_canonical(cp.p);
  out.violation = out.boundary_point - q_avoid;
  return out;
}

// ---------------------------------------------------------------------------
// Construction kinematics shared by the foci differentials

namespace {

// Rates of the from_waypoints construction under a foci perturbation. The
// rotation convention is recomputed from the foci so the chain matches what
// finite differences of the construction see.
struct Kinematics {
  Mat3 H = Mat3::Identity();
  Vec3 nu_F = Vec3::UnitX();
  Vec3 o = Vec3::Zero();
  double a = 0, b = 0, c = 0;
  bool spherical = false;  // c ~ 0: rotation rule frozen

  static Kinematics of(const ReachabilityEllipsoid& e) {
    Kinematics k;
    k.o = e.center();
    k.a = e.a();
    k.b = e.b();
    k.c = e.c();
    k.spherical = k.c < 1e-12 * k.a;
    if (!k.spherical) {
      k.nu_F = (e.focus2() - e.focus1()) / (2.0 * k.c);
      k.H = householder(k.nu_F, Vec3::UnitX());
    }
    return k;
  }

  struct Rates {
    Vec3 odot = Vec3::Zero();
    Mat3 Hdot = Mat3::Zero();
    double bdot = 0;
  };

  Rates rates(const Vec3& q1dot, const Vec3& q2dot) const {
    Rates r;
    r.odot = 0.5 * (q1dot + q2dot);
    if (spherical) return r;  // direction undefined; shape change is second order
    Vec3 ddot = q2dot - q1dot;
    double cdot = 0.5 * nu_F.dot(ddot);
    r.bdot = -(c / b) * cdot;
    Vec3 nuFdot = (Mat3::Identity() - nu_F * nu_F.transpose()) * ddot / (2.0 * c);
    Vec3 up = nu_F + Vec3::UnitX();
    if (up.norm() < kAntipodalTol) {
      // fallback-rotation branch: differentiate H = 2ww^T - I directly
      Vec3 ek = Vec3::Zero();
      for (int i = 0; i < 3; ++i) {
        if (Vec3::Unit(i).cross(nu_F).norm() > 1e-6) {
          ek = Vec3::Unit(i);
          break;
        }
      }
      Vec3 g = ek - ek.dot(nu_F) * nu_F;
      double gn = g.norm();
      Vec3 w = g / gn;
      Vec3 gdot = -(ek.dot(nuFdot)) * nu_F - ek.dot(nu_F) * nuFdot;
      Vec3 wdot = (Mat3::Identity() - w * w.transpose()) * gdot / gn;
      r.Hdot = 2.0 * (wdot * w.transpose() + w * wdot.transpose());
    } else {
      r.Hdot = householder_differential(nu_F, Vec3::UnitX(), nuFdot);
    }
    return r;
  }
};

// Violation rate of the point constraint for one foci perturbation.
Vec3 point_violation_rate(const Kinematics& k, const CanonicalProjection& cp, const Vec3& qt,
                          const Vec3& q_avoid, const Kinematics::Rates& r) {
  if (k.spherical) {
    // nearest-point map of a ball: pi = o + a * v, v = (q - o)/|q - o|
    Vec3 d = q_avoid - k.o;
    double rho = d.norm();
    Vec3 v = d / rho;
    return r.odot - (k.a / rho) * (Mat3::Identity() - v * v.transpose()) * r.odot;
  }
  double a = k.a, b = k.b;
  double c2 = k.c * k.c;
  double A = cp.sigma + c2;  // s + a^2
  double B = cp.sigma;       // s + b^2
  double x = qt.x();
  double r2 = qt.y() * qt.y() + qt.z() * qt.z();
  Vec3 qtdot = r.Hdot * (q_avoid - k.o) - k.H * r.odot;
  Vec3 dFdq(2 * a * a * x / (A * A), 2 * b * b * qt.y() / (B * B), 2 * b * b * qt.z() / (B * B));
  double dFds = -2.0 * (a * a * x * x / (A * A * A) + b * b * r2 / (B * B * B));
  double dFdb = 2.0 * b * r2 * (B - 2.0 * b * b) / (B * B * B);  // s - b^2 = B - 2b^2
  double sdot = -(dFdq.dot(qtdot) + dFdb * r.bdot) / dFds;
  double Bdot = sdot + 2.0 * b * r.bdot;
  Vec3 pdot(a * a * qtdot.x() / A - a * a * x * sdot / (A * A),
            (2 * b * r.bdot * qt.y() + b * b * qtdot.y()) / B - b * b * qt.y() * Bdot / (B * B),
            (2 * b * r.bdot * qt.z() + b * b * qtdot.z()) / B - b * b * qt.z() * Bdot / (B * B));
  return r.Hdot * cp.p + k.H * pdot + r.odot;
}

// Tangency data in the householder convention for the differential chains.
struct PlaneCanonical {
  Vec3 n_E;
  double d_E, d_Et;
  Vec3 W;  // Q^{-1} n_E
};

PlaneCanonical plane_canonical(const Kinematics& k, const Hyperplane& plane) {
  PlaneCanonical pc;
  pc.n_E = k.H.transpose() * plane.normal;
  pc.d_E = plane.offset - plane.normal.dot(k.o);
  pc.W = Vec3(k.a * k.a * pc.n_E.x(), k.b * k.b * pc.n_E.y(), k.b * k.b * pc.n_E.z());
  pc.d_Et = std::sqrt(pc.n_E.dot(pc.W));
  return pc;
}

// Violation rate of the plane constraint; ndot/ddot_offset carry the motion of
// the plane itself (zero for fixed planes, nonzero for segment supports).
Vec3 plane_violation_rate(const Kinematics& k, const PlaneCanonical& pc, const Hyperplane& plane,
                          const Kinematics::Rates& r, const Vec3& ndot, double ddot_offset) {
  double sign = pc.d_E >= 0 ? 1.0 : -1.0;
  Vec3 nEdot = r.Hdot.transpose() * plane.normal + k.H.transpose() * ndot;
  double dEdot = ddot_offset - ndot.dot(k.o) - plane.normal.dot(r.odot);
  Vec3 Wdot(k.a * k.a * nEdot.x(), 2 * k.b * r.bdot * pc.n_E.y() + k.b * k.b * nEdot.y(),
            2 * k.b * r.bdot * pc.n_E.z() + k.b * k.b * nEdot.z());
  double dEtdot = (nEdot.dot(pc.W) + pc.n_E.dot(Wdot)) / (2.0 * pc.d_Et);
  double t2 = pc.d_Et * pc.d_Et;
  Vec3 p_t = sign * pc.W / pc.d_Et;
  Vec3 p_L = pc.d_E * pc.W / t2;
  Vec3 ptdot = sign * (Wdot / pc.d_Et - pc.W * dEtdot / t2);
  Vec3 pLdot = (dEdot * pc.W + pc.d_E * Wdot) / t2 - 2.0 * pc.d_E * pc.W * dEtdot / (t2 * pc.d_Et);
  return r.Hdot * (p_t - p_L) + k.H * (ptdot - pLdot);
}

}  // namespace

FociJacobian point_projection_differential(const ReachabilityEllipsoid& e, const Vec3& q_avoid) {
  FociJacobian jac = FociJacobian::Zero();
  if (e.level(q_avoid) >= -kInsideTol) return jac;  // inactive constraint
  Kinematics k = Kinematics::of(e);
  Vec3 qt = k.H.transpose() * (q_avoid - k.o);
  double x = qt.x();
  double r = std::hypot(qt.y(), qt.z());
  if (r < kDegenerateLine && k.a * std::abs(x) <= k.c * k.c)
    throw DegenerateConfiguration("projection tie near the center line");
  CanonicalProjection cp = project_canonical(qt, k.a, k.b, k.c);
  for (int j = 0; j < 6; ++j) {
    Vec3 q1dot = Vec3::Zero(), q2dot = Vec3::Zero();
    if (j < 3)
      q1dot[j] = 1.0;
    else
      q2dot[j - 3] = 1.0;
    jac.col(j) = point_violation_rate(k, cp, qt, q_avoid, k.rates(q1dot, q2dot));
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Plane constraint

PlaneTangency plane_tangency(const ReachabilityEllipsoid& e, const Hyperplane& plane) {
  PlaneTangency t;
  Vec3 n_E = e.rotation().transpose() * plane.normal;
  t.d_E = plane.offset - plane.normal.dot(e.center());
  Vec3 w(e.a() * e.a() * n_E.x(), e.b() * e.b() * n_E.y(), e.b() * e.b() * n_E.z());
  t.d_Et = std::sqrt(n_E.dot(w));
  t.p_t1 = w / t.d_Et;
  t.p_t2 = -t.p_t1;
  t.p_L = t.d_E * w / (t.d_Et * t.d_Et);
  return t;
}

Vec3 plane_constraint_value(const ReachabilityEllipsoid& e, const Hyperplane& plane) {
  PlaneTangency t = plane_tangency(e, plane);
  if (std::abs(t.d_E) > t.d_Et) return Vec3::Zero();
  Vec3 p_t = t.d_E >= 0 ? t.p_t1 : t.p_t2;
  return e.rotation() * (p_t - t.p_L);
}

FociJacobian plane_constraint_differential(const ReachabilityEllipsoid& e, const Hyperplane& plane,
                                           bool strict) {
  Kinematics k = Kinematics::of(e);
  PlaneCanonical pc = plane_canonical(k, plane);
  if (strict) {
    if (std::abs(std::abs(pc.d_E) - pc.d_Et) < kBoundaryTol || std::abs(pc.d_E) < kBoundaryTol)
      throw BoundaryCase("plane offset within tolerance of a case boundary");
  }
  FociJacobian jac = FociJacobian::Zero();
  if (std::abs(pc.d_E) > pc.d_Et) return jac;  // separated: inactive
  for (int j = 0; j < 6; ++j) {
    Vec3 q1dot = Vec3::Zero(), q2dot = Vec3::Zero();
    if (j < 3)
      q1dot[j] = 1.0;
    else
      q2dot[j - 3] = 1.0;
    jac.col(j) = plane_violation_rate(k, pc, plane, k.rates(q1dot, q2dot), Vec3::Zero(), 0.0);
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Segment and polygon constraints

Hyperplane segment_supporting_plane(const ReachabilityEllipsoid& e, const Vec3& p1,
                                    const Vec3& p2) {
  Vec3 seg = p2 - p1;
  double len = seg.norm();
  if (len < kSegmentMin) throw DegenerateSegment("segment endpoints coincide");
  Vec3 tau = seg / len;
  Vec3 g = (Mat3::Identity() - tau * tau.transpose()) * (p1 - e.center());
  Vec3 n = g.norm() < kSegmentMin ? orthogonal_axis(tau) : Vec3(g.normalized());
  return Hyperplane{n, n.dot(p1)};
}

namespace {

enum class SegmentCase { kPointAtP1, kPointAtP2, kPlane };

SegmentCase segment_case(const ReachabilityEllipsoid& e, const Vec3& p1, const Vec3& p2,
                         const Vec3& p_L_canonical) {
  Vec3 p1c = e.to_canonical(p1);
  Vec3 p2c = e.to_canonical(p2);
  if ((p2c - p1c).dot(p_L_canonical - p1c) < 0) return SegmentCase::kPointAtP1;
  if ((p1c - p2c).dot(p_L_canonical - p2c) < 0) return SegmentCase::kPointAtP2;
  return SegmentCase::kPlane;
}

}  // namespace

Vec3 segment_constraint_value(const ReachabilityEllipsoid& e, const Vec3& p1, const Vec3& p2) {
  Hyperplane plane = segment_supporting_plane(e, p1, p2);
  PlaneTangency t = plane_tangency(e, plane);
  switch (segment_case(e, p1, p2, t.p_L)) {
    case SegmentCase::kPointAtP1:
      return point_projection(e, p1).violation;
    case SegmentCase::kPointAtP2:
      return point_projection(e, p2).violation;
    case SegmentCase::kPlane: {
      if (std::abs(t.d_E) > t.d_Et) return Vec3::Zero();
      Vec3 p_t = t.d_E >= 0 ? t.p_t1 : t.p_t2;
      return e.rotation() * (p_t - t.p_L);
    }
  }
  return Vec3::Zero();
}

FociJacobian segment_constraint_differential(const ReachabilityEllipsoid& e, const Vec3& p1,
                                             const Vec3& p2, bool strict) {
  Hyperplane plane = segment_supporting_plane(e, p1, p2);
  PlaneTangency t = plane_tangency(e, plane);
  switch (segment_case(e, p1, p2, t.p_L)) {
    case SegmentCase::kPointAtP1:
      return point_projection_differential(e, p1);
    case SegmentCase::kPointAtP2:
      return point_projection_differential(e, p2);
    case SegmentCase::kPlane:
      break;
  }
  Kinematics k = Kinematics::of(e);
  PlaneCanonical pc = plane_canonical(k, plane);
  if (strict) {
    if (std::abs(std::abs(pc.d_E) - pc.d_Et) < kBoundaryTol || std::abs(pc.d_E) < kBoundaryTol)
      throw BoundaryCase("segment support within tolerance of a case boundary");
  }
  FociJacobian jac = FociJacobian::Zero();
  if (std::abs(pc.d_E) > pc.d_Et) return jac;
  // the support normal follows the center: n = g/|g|, g = (I - tau tau^T)(p1 - o)
  Vec3 tau = (p2 - p1).normalized();
  Mat3 proj_tau = Mat3::Identity() - tau * tau.transpose();
  Vec3 g = proj_tau * (p1 - e.center());
  bool movable_normal = g.norm() >= kSegmentMin;
  Mat3 proj_n = Mat3::Identity() - plane.normal * plane.normal.transpose();
  for (int j = 0; j < 6; ++j) {
    Vec3 q1dot = Vec3::Zero(), q2dot = Vec3::Zero();
    if (j < 3)
      q1dot[j] = 1.0;
    else
      q2dot[j - 3] = 1.0;
    Kinematics::Rates r = k.rates(q1dot, q2dot);
    Vec3 ndot = Vec3::Zero();
    double ddot = 0.0;
    if (movable_normal) {
      Vec3 gdot = proj_tau * (-r.odot);
      ndot = proj_n * gdot / g.norm();
      ddot = ndot.dot(p1);
    }
    jac.col(j) = plane_violation_rate(k, pc, plane, r, ndot, ddot);
  }
  return jac;
}

Eigen::VectorXd polygon_constraint_value(const ReachabilityEllipsoid& e,
                                         const ConvexPolygon& poly) {
  Eigen::VectorXd out(3 * poly.size());
  for (int i = 0; i < poly.size(); ++i) {
    auto [p1, p2] = poly.edge(i);
    out.segment<3>(3 * i) = segment_constraint_value(e, p1, p2);
  }
  return out;
}

Eigen::MatrixXd polygon_constraint_differential(const ReachabilityEllipsoid& e,
                                                const ConvexPolygon& poly, bool strict) {
  Eigen::MatrixXd out(3 * poly.size(), 6);
  for (int i = 0; i < poly.size(); ++i) {
    auto [p1, p2] = poly.edge(i);
    out.middleRows<3>(3 * i) = segment_constraint_differential(e, p1, p2, strict);
  }
  return out;
}

bool ellipsoid_region_intersects(const ReachabilityEllipsoid& e, const ConvexPolygon& poly) {
  if (polygon_constraint_value(e, poly).squaredNorm() > 0) return true;
  for (const Vec3& v : poly.vertices()) {
    if (e.strictly_inside(v)) return true;
  }
  return poly.contains(e.center());
}

}  // namespace coplan::geometry
