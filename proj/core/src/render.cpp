#include "coplan/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace coplan::render {

namespace {

constexpr double kCanvasWidth = 640.0;
constexpr double kMargin = 40.0;

const char* kRobotColors[] = {"#1565c0", "#2e7d32", "#6a1b9a", "#ef6c00", "#00838f",
                              "#c2185b", "#4e342e", "#827717", "#283593", "#558b2f"};
const char* kFlowColors[] = {"#d81b60", "#00acc1", "#7cb342", "#fb8c00", "#5e35b1",
                             "#f4511e", "#039be5", "#8d6e63", "#c0ca33", "#3949ab"};

std::string fmt(double v) {
  if (std::abs(v) < 5e-7) v = 0.0;  // avoid "-0"
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Frame {
  double min_x = 0, min_y = 0, max_x = 1, max_y = 1;
  double scale = 1, height = 1;

  void fit() {
    if (max_x - min_x < 1e-9) max_x = min_x + 1;
    if (max_y - min_y < 1e-9) max_y = min_y + 1;
    scale = (kCanvasWidth - 2 * kMargin) / (max_x - min_x);
    height = 2 * kMargin + (max_y - min_y) * scale;
  }
  double sx(double x) const { return kMargin + (x - min_x) * scale; }
  double sy(double y) const { return height - kMargin - (y - min_y) * scale; }
  std::string point(const Vec3& p) const { return fmt(sx(p.x())) + "," + fmt(sy(p.y())); }
};

void polygon_element(std::string& svg, const Frame& f, const geometry::ConvexPolygon& poly,
                     const char* fill, const char* stroke, const char* opacity) {
  svg += "<polygon points=\"";
  for (int i = 0; i < poly.size(); ++i) {
    if (i) svg += ' ';
    svg += f.point(poly.vertices()[i]);
  }
  svg += "\" fill=\"";
  svg += fill;
  svg += "\" fill-opacity=\"";
  svg += opacity;
  svg += "\" stroke=\"";
  svg += stroke;
  svg += "\" stroke-width=\"1\"/>\n";
}

void polyline_element(std::string& svg, const Frame& f, const graph::Waypoints& pts,
                      const std::string& stroke, double width, const char* dash) {
  if (pts.size() < 2) return;
  svg += "<polyline points=\"";
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) svg += ' ';
    svg += f.point(pts[i]);
  }
  svg += "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt(width) + "\"";
  if (dash) svg += std::string(" stroke-dasharray=\"") + dash + "\"";
  svg += "/>\n";
}

// Times at which a robot appears in the co-observation schedule, ascending.
std::vector<int> meeting_times(const scenario::Scenario& s, int robot) {
  std::set<int> times;
  for (const auto& e : s.co_observations) {
    if (e.robot_a == robot || e.robot_b == robot) times.insert(e.time);
  }
  return {times.begin(), times.end()};
}

}  // namespace

std::string render_svg(const RenderInput& in) {
  Frame f;
  if (in.scen) {
    f.min_x = in.scen->workspace_min.x();
    f.min_y = in.scen->workspace_min.y();
    f.max_x = in.scen->workspace_max.x();
    f.max_y = in.scen->workspace_max.y();
  } else if (in.trajectories) {
    const auto& q = *in.trajectories;
    f.min_x = f.min_y = 1e300;
    f.max_x = f.max_y = -1e300;
    for (int r = 0; r < q.robots(); ++r) {
      for (int t = 0; t <= q.horizon(); ++t) {
        Vec3 p = q.at3(r, t);
        f.min_x = std::min(f.min_x, p.x());
        f.max_x = std::max(f.max_x, p.x());
        f.min_y = std::min(f.min_y, p.y());
        f.max_y = std::max(f.max_y, p.y());
      }
    }
  }
  f.fit();

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kCanvasWidth) +
         "\" height=\"" + fmt(f.height) + "\" viewBox=\"0 0 " + fmt(kCanvasWidth) + " " +
         fmt(f.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  // workspace frame
  svg += "<rect x=\"" + fmt(f.sx(f.min_x)) + "\" y=\"" + fmt(f.sy(f.max_y)) + "\" width=\"" +
         fmt((f.max_x - f.min_x) * f.scale) + "\" height=\"" + fmt((f.max_y - f.min_y) * f.scale) +
         "\" fill=\"none\" stroke=\"#37474f\" stroke-width=\"1.5\"/>\n";

  if (in.scen) {
    for (const auto& poly : in.scen->obstacles)
      polygon_element(svg, f, poly, "#9e9e9e", "#616161", "0.7");
    for (const auto& poly : in.scen->forbidden)
      polygon_element(svg, f, poly, "#e53935", "#b71c1c", "0.45");
  }

  // reachability envelope outlines between scheduled meetings
  if (in.draw_envelopes && in.scen && in.trajectories) {
    const auto& q = *in.trajectories;
    for (int r = 0; r < q.robots(); ++r) {
      auto times = meeting_times(*in.scen, r);
      for (size_t i = 0; i + 1 < times.size(); ++i) {
        try {
          auto e = geometry::ReachabilityEllipsoid::from_waypoints(
              q.at3(r, times[i]), q.at3(r, times[i + 1]), times[i], times[i + 1],
              in.scen->v_max);
          double angle = std::atan2(e.rotation()(1, 0), e.rotation()(0, 0));
          svg += "<ellipse rx=\"" + fmt(e.a() * f.scale) + "\" ry=\"" + fmt(e.b() * f.scale) +
                 "\" fill=\"none\" stroke=\"#212121\" stroke-width=\"1\" transform=\"translate(" +
                 fmt(f.sx(e.center().x())) + "," + fmt(f.sy(e.center().y())) + ") rotate(" +
                 fmt(-angle * 180.0 / M_PI) + ")\"/>\n";
        } catch (const InfeasibleVelocity&) {
          // no envelope exists between these waypoints; nothing to outline
        }
      }
    }
  }

  // per-robot trajectories with waypoint dots
  if (in.trajectories) {
    const auto& q = *in.trajectories;
    for (int r = 0; r < q.robots(); ++r) {
      const char* color = kRobotColors[r % 10];
      graph::Waypoints pts;
      for (int t = 0; t <= q.horizon(); ++t) pts.push_back(q.at3(r, t));
      polyline_element(svg, f, pts, color, 2.0, nullptr);
      for (const auto& p : pts)
        svg += "<circle cx=\"" + fmt(f.sx(p.x())) + "\" cy=\"" + fmt(f.sy(p.y())) +
               "\" r=\"2\" fill=\"" + color + "\"/>\n";
    }
  }

  // co-observation markers: thin dashed tie between the two robots
  if (in.scen && in.trajectories) {
    const auto& q = *in.trajectories;
    for (const auto& e : in.scen->co_observations) {
      if (e.robot_a >= q.robots() || e.robot_b >= q.robots() || e.time > q.horizon()) continue;
      Vec3 a = q.at3(e.robot_a, e.time), b = q.at3(e.robot_b, e.time);
      svg += "<line x1=\"" + fmt(f.sx(a.x())) + "\" y1=\"" + fmt(f.sy(a.y())) + "\" x2=\"" +
             fmt(f.sx(b.x())) + "\" y2=\"" + fmt(f.sy(b.y())) +
             "\" stroke=\"#000000\" stroke-width=\"1\" stroke-dasharray=\"2,2\"/>\n";
      for (const Vec3& p : {a, b})
        svg += "<circle cx=\"" + fmt(f.sx(p.x())) + "\" cy=\"" + fmt(f.sy(p.y())) +
               "\" r=\"3.5\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    }
  }

  // scheduling-graph markers
  if (in.graph) {
    for (const auto& v : in.graph->vertices) {
      if (v.kind == graph::VertexKind::security) {
        svg += "<rect x=\"" + fmt(f.sx(v.position.x()) - 3) + "\" y=\"" +
               fmt(f.sy(v.position.y()) - 3) +
               "\" width=\"6\" height=\"6\" fill=\"#212121\"/>\n";
      } else if (v.kind == graph::VertexKind::arrival ||
                 v.kind == graph::VertexKind::departure) {
        svg += "<circle cx=\"" + fmt(f.sx(v.position.x())) + "\" cy=\"" +
               fmt(f.sy(v.position.y())) +
               "\" r=\"3\" fill=\"none\" stroke=\"#455a64\" stroke-width=\"1\"/>\n";
      }
    }
  }

  // cross-trajectory paths: dashed, colored per flow when a solution exists
  if (in.graph && in.solution) {
    for (size_t k = 0; k < in.solution->flows.size(); ++k) {
      const char* color = kFlowColors[k % 10];
      for (int e : in.solution->flows[k]) {
        if (e < 0 || e >= static_cast<int>(in.graph->edges.size())) continue;
        const auto& edge = in.graph->edges[e];
        if (edge.kind == graph::EdgeKind::cross)
          polyline_element(svg, f, edge.polyline, color, 2.0, "6,4");
      }
    }
  } else if (in.graph) {
    for (const auto& edge : in.graph->edges) {
      if (edge.kind == graph::EdgeKind::cross)
        polyline_element(svg, f, edge.polyline, "#90a4ae", 1.5, "6,4");
    }
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace coplan::render
