#include <coplan/checkpoint_graph.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

namespace coplan::graph {

namespace {

// True when the reachability envelope between two time-stamped waypoints
// cannot host a covert excursion into any forbidden polygon. With no
// forbidden polygons the condition is vacuous. A degenerate envelope (the
// waypoints as far apart as the speed cap allows) is treated as unclear:
// there is no slack to certify.
bool span_clear(const Vec3& p0, int t0, const Vec3& p1, int t1,
                const std::vector<geometry::ConvexPolygon>& forbidden, double v_max) {
  if (forbidden.empty()) return true;
  std::optional<geometry::ReachabilityEllipsoid> envelope;
  try {
    envelope.emplace(geometry::ReachabilityEllipsoid::from_waypoints(p0, p1, t0, t1, v_max));
  } catch (const InfeasibleVelocity&) {
    return false;
  }
  for (const auto& poly : forbidden) {
    if (geometry::ellipsoid_region_intersects(*envelope, poly)) return false;
  }
  return true;
}

}  // namespace

const char* to_string(VertexKind kind) {
  switch (kind) {
    case VertexKind::start: return "start";
    case VertexKind::end: return "end";
    case VertexKind::security: return "security";
    case VertexKind::arrival: return "arrival";
    case VertexKind::departure: return "departure";
    case VertexKind::source: return "source";
    case VertexKind::sink: return "sink";
  }
  return "?";
}

const char* to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::in_trajectory: return "in_trajectory";
    case EdgeKind::cross: return "cross";
    case EdgeKind::virtual_edge: return "virtual";
  }
  return "?";
}

std::vector<Checkpoint> generate_checkpoints(const Waypoints& trajectory, int subteam,
                                             const std::vector<geometry::ConvexPolygon>& forbidden,
                                             double v_max) {
  if (trajectory.size() < 2)
    throw ValidationError("trajectory", "needs at least two waypoints");
  if (v_max <= 0) throw ValidationError("v_max", "must be positive");
  const int horizon = static_cast<int>(trajectory.size()) - 1;

  auto clear = [&](int t0, int t1) {
    return span_clear(trajectory[t0], t0, trajectory[t1], t1, forbidden, v_max);
  };

  std::vector<int> cuts;
  // Iteratively resolves gaps whose end-to-end envelope is unclear. Each
  // round shrinks the gap from both sides, so this terminates.
  std::vector<std::pair<int, int>> gaps{{0, horizon}};
  while (!gaps.empty()) {
    auto [t0, t1] = gaps.back();
    gaps.pop_back();
    if (clear(t0, t1)) continue;
    if (t1 - t0 <= 1)
      throw NoSecurePartition("sub-team " + std::to_string(subteam) + ": steps " +
                              std::to_string(t0) + ".." + std::to_string(t1) +
                              " cannot be certified even step-by-step");

    int forward = 0;
    for (int k = 1; k <= t1 - t0 - 1 && clear(t0, t0 + k); ++k) forward = k;
    if (forward == 0)
      throw NoSecurePartition("sub-team " + std::to_string(subteam) + ": steps " +
                              std::to_string(t0) + ".." + std::to_string(t0 + 1) +
                              " cannot be certified even step-by-step");
    int tf = t0 + forward;

    int backward = 0;
    for (int k = 1; t1 - k >= tf && clear(t1 - k, t1); ++k) backward = k;
    if (backward == 0)
      throw NoSecurePartition("sub-team " + std::to_string(subteam) + ": steps " +
                              std::to_string(t1 - 1) + ".." + std::to_string(t1) +
                              " cannot be certified even step-by-step");
    int tb = t1 - backward;

    cuts.push_back(tf);
    if (tb > tf) {
      cuts.push_back(tb);
      gaps.emplace_back(tf, tb);
    }
  }

  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Checkpoint> result;
  result.push_back({subteam, trajectory.front(), 0, VertexKind::start});
  for (int t : cuts) result.push_back({subteam, trajectory[t], t, VertexKind::security});
  result.push_back({subteam, trajectory.back(), horizon, VertexKind::end});
  return result;
}

CrossEdges find_cross_edges(const Checkpoint& checkpoint,
                            const std::vector<Waypoints>& trajectories, const rrt::World& world,
                            const std::vector<geometry::ConvexPolygon>& forbidden, double v_max,
                            const rrt::TreeParams& params) {
  if (v_max <= 0) throw ValidationError("v_max", "must be positive");
  rrt::PlanTree tree = rrt::grow_tree(checkpoint.position, world, params);

  CrossEdges result;
  for (int r = 0; r < static_cast<int>(trajectories.size()); ++r) {
    if (r == checkpoint.subteam) continue;
    const Waypoints& other = trajectories[r];
    std::optional<CrossCandidate> best_arrival;
    std::optional<CrossCandidate> best_departure;

    for (int t = 0; t < static_cast<int>(other.size()); ++t) {
      auto route = rrt::query_path(tree, other[t], params.goal_tolerance);
      if (!route) continue;

      // Close the query tolerance gap so the polyline ends exactly at the
      // waypoint; discard the candidate when the closing segment collides.
      Waypoints polyline = route->path;
      double cost = route->cost;
      double gap = (polyline.back() - other[t]).norm();
      if (gap > 0) {
        if (!world.segment_free(polyline.back(), other[t])) continue;
        polyline.push_back(other[t]);
        cost += gap;
      }
      int steps = static_cast<int>(std::ceil(cost / v_max));

      if (checkpoint.time + steps < t &&
          span_clear(checkpoint.position, checkpoint.time, other[t], t, forbidden, v_max)) {
        if (!best_arrival || t < best_arrival->to_time) {
          CrossCandidate c;
          c.from_subteam = checkpoint.subteam;
          c.from_time = checkpoint.time;
          c.to_subteam = r;
          c.to_time = t;
          c.arrival = true;
          c.path_cost = cost;
          c.travel_steps = steps;
          c.polyline = polyline;
          best_arrival = std::move(c);
        }
      }

      if (t + steps < checkpoint.time &&
          span_clear(other[t], t, checkpoint.position, checkpoint.time, forbidden, v_max)) {
        if (!best_departure || t > best_departure->from_time) {
          CrossCandidate c;
          c.from_subteam = r;
          c.from_time = t;
          c.to_subteam = checkpoint.subteam;
          c.to_time = checkpoint.time;
          c.arrival = false;
          c.path_cost = cost;
          c.travel_steps = steps;
          c.polyline = Waypoints(polyline.rbegin(), polyline.rend());
          best_departure = std::move(c);
        }
      }
    }

    if (best_arrival) result.arrivals.push_back(std::move(*best_arrival));
    if (best_departure) result.departures.push_back(std::move(*best_departure));
  }
  return result;
}

int FlowGraph::vertex_by_id(const std::string& id) const {
  for (int i = 0; i < static_cast<int>(vertices.size()); ++i) {
    if (vertices[i].id == id) return i;
  }
  return -1;
}

std::vector<int> FlowGraph::topological_order() const {
  int n = static_cast<int>(vertices.size());
  std::vector<int> indegree(n, 0);
  for (const auto& e : edges) ++indegree[e.to];
  std::vector<int> order;
  std::vector<int> ready;
  for (int v = n - 1; v >= 0; --v) {
    if (indegree[v] == 0) ready.push_back(v);  // reversed so pop_back yields ascending
  }
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (const auto& e : edges) {
      if (e.from == v && --indegree[e.to] == 0) ready.push_back(e.to);
    }
    std::sort(ready.begin(), ready.end(), std::greater<int>());
  }
  if (static_cast<int>(order.size()) != n)
    throw ValidationError("flow_graph", "edge relation contains a cycle");
  return order;
}

FlowGraph build_flow_graph(const std::vector<std::vector<Checkpoint>>& checkpoints,
                           const std::vector<CrossCandidate>& cross, double w_c, double w_t) {
  if (w_c <= w_t)
    throw WeightOrderViolation("cross weight must exceed in-trajectory weight (w_c=" +
                               std::to_string(w_c) + ", w_t=" + std::to_string(w_t) + ")");

  auto rank = [](VertexKind kind) {
    switch (kind) {
      case VertexKind::security: return 3;
      case VertexKind::start:
      case VertexKind::end: return 2;
      default: return 1;
    }
  };

  // Deduplicated vertex table keyed by (subteam, time); stronger kinds win.
  std::map<std::pair<int, int>, std::pair<Vec3, VertexKind>> table;
  auto add_vertex = [&](int subteam, int time, const Vec3& position, VertexKind kind) {
    auto key = std::make_pair(subteam, time);
    auto it = table.find(key);
    if (it == table.end()) {
      table.emplace(key, std::make_pair(position, kind));
    } else if (rank(kind) > rank(it->second.second)) {
      it->second.second = kind;
    }
  };

  for (const auto& team : checkpoints) {
    if (team.empty()) throw ValidationError("checkpoints", "sub-team without checkpoints");
    for (size_t i = 0; i < team.size(); ++i) {
      if (i > 0 && team[i].time <= team[i - 1].time)
        throw ValidationError("checkpoints", "sub-team list must be sorted by time");
      add_vertex(team[i].subteam, team[i].time, team[i].position, team[i].kind);
    }
  }
  for (const auto& c : cross) {
    if (c.polyline.size() < 2) throw ValidationError("cross", "polyline needs two points");
    // The checkpoint side must already be a vertex; the waypoint side is
    // created (or kept, when a stronger checkpoint already sits there).
    auto checkpoint_side =
        c.arrival ? std::make_pair(c.from_subteam, c.from_time)
                  : std::make_pair(c.to_subteam, c.to_time);
    if (table.find(checkpoint_side) == table.end())
      throw ValidationError("cross", "edge endpoint is not a listed checkpoint");
    if (c.arrival) {
      add_vertex(c.to_subteam, c.to_time, c.polyline.back(), VertexKind::arrival);
    } else {
      add_vertex(c.from_subteam, c.from_time, c.polyline.front(), VertexKind::departure);
    }
  }

  FlowGraph g;
  std::map<std::pair<int, int>, int> index;
  for (const auto& [key, value] : table) {
    FlowVertex v;
    v.subteam = key.first;
    v.time = key.second;
    v.id = "p" + std::to_string(v.subteam) + "t" + std::to_string(v.time);
    v.position = value.first;
    v.kind = value.second;
    index[key] = static_cast<int>(g.vertices.size());
    g.vertices.push_back(std::move(v));
  }
  for (int i = 0; i < static_cast<int>(g.vertices.size()); ++i) {
    if (g.vertices[i].kind == VertexKind::security) g.security.push_back(i);
  }

  g.source = static_cast<int>(g.vertices.size());
  g.vertices.push_back({"src", -1, -1, Vec3::Zero(), VertexKind::source});
  g.sink = static_cast<int>(g.vertices.size());
  g.vertices.push_back({"snk", -1, -1, Vec3::Zero(), VertexKind::sink});

  // In-trajectory chains plus the virtual endpoints, per sub-team.
  int previous_subteam = std::numeric_limits<int>::min();
  int previous_vertex = -1;
  for (const auto& [key, vertex] : index) {
    if (key.first != previous_subteam) {
      if (previous_vertex >= 0)
        g.edges.push_back({previous_vertex, g.sink, EdgeKind::virtual_edge, 0.0, {}});
      g.edges.push_back({g.source, vertex, EdgeKind::virtual_edge, 0.0, {}});
      previous_subteam = key.first;
    } else {
      g.edges.push_back({previous_vertex, vertex, EdgeKind::in_trajectory, -w_t, {}});
    }
    previous_vertex = vertex;
  }
  if (previous_vertex >= 0)
    g.edges.push_back({previous_vertex, g.sink, EdgeKind::virtual_edge, 0.0, {}});

  for (const auto& c : cross) {
    int from = index.at({c.from_subteam, c.from_time});
    int to = index.at({c.to_subteam, c.to_time});
    g.edges.push_back({from, to, EdgeKind::cross, w_c, c.polyline});
  }

  g.topological_order();  // throws on a cycle
  return g;
}

}  // namespace coplan::graph
