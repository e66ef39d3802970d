#pragma once

#include <string>
#include <vector>

#include <coplan/geometry.hpp>
#include <coplan/rrt.hpp>
#include <coplan/types.hpp>

namespace coplan::graph {

// A reference trajectory for one sub-team: one waypoint per time step.
using Waypoints = std::vector<Vec3>;

enum class VertexKind { start, end, security, arrival, departure, source, sink };
const char* to_string(VertexKind kind);

// A time-stamped waypoint on a sub-team trajectory that participates in the
// scheduling graph.
struct Checkpoint {
  int subteam = 0;
  Vec3 position = Vec3::Zero();
  int time = 0;
  VertexKind kind = VertexKind::security;
};

// Splits [0,T] into consecutive spans whose waypoint-to-waypoint reachability
// ellipsoids stay clear of every forbidden polygon, using a bidirectional
// greedy scan: extend forward from the left end of an unresolved gap to the
// last clear step, extend backward from the right end likewise, emit both
// cut points, and recurse on the middle. The result always begins with
// (q(0), 0) and ends with (q(T), T); interior cuts have security kind.
// A span with no forbidden polygons at all is clear by definition.
// Throws NoSecurePartition when a gap cannot be split further (adjacent
// steps already produce an intersecting or degenerate envelope).
std::vector<Checkpoint> generate_checkpoints(const Waypoints& trajectory, int subteam,
                                             const std::vector<geometry::ConvexPolygon>& forbidden,
                                             double v_max);

// One candidate cross-trajectory connection, oriented the way the deviating
// robot travels: arrivals run checkpoint -> other trajectory, departures run
// other trajectory -> checkpoint. The polyline is the collision-free route.
struct CrossCandidate {
  int from_subteam = 0;
  int from_time = 0;
  int to_subteam = 0;
  int to_time = 0;
  bool arrival = true;
  double path_cost = 0;   // polyline length (m)
  int travel_steps = 0;   // ceil(path_cost / v_max)
  Waypoints polyline;     // from-position first, to-position last
};

struct CrossEdges {
  std::vector<CrossCandidate> arrivals;    // earliest feasible per other trajectory
  std::vector<CrossCandidate> departures;  // latest feasible per other trajectory
};

// Grows a single planning tree rooted at the checkpoint and scans every
// waypoint of every other trajectory. A waypoint at time t qualifies as an
// arrival when the routed travel time fits strictly before t and the
// checkpoint-to-waypoint reachability ellipsoid avoids every forbidden
// polygon; departures are symmetric with the route reversed. Only the
// earliest arrival and the latest departure per other trajectory are kept.
// The world's obstacle list must already include the forbidden polygons so
// routed paths never cross them; `forbidden` is used for the envelope check.
CrossEdges find_cross_edges(const Checkpoint& checkpoint,
                            const std::vector<Waypoints>& trajectories, const rrt::World& world,
                            const std::vector<geometry::ConvexPolygon>& forbidden, double v_max,
                            const rrt::TreeParams& params);

enum class EdgeKind { in_trajectory, cross, virtual_edge };
const char* to_string(EdgeKind kind);

struct FlowVertex {
  std::string id;  // "p{subteam}t{time}", or "src"/"snk"
  int subteam = -1;
  int time = -1;
  Vec3 position = Vec3::Zero();
  VertexKind kind = VertexKind::source;
};

struct FlowEdge {
  int from = -1;
  int to = -1;
  EdgeKind kind = EdgeKind::in_trajectory;
  double weight = 0;
  Waypoints polyline;  // cross edges only
};

// Directed acyclic scheduling graph: per-sub-team chains of time-stamped
// vertices, cross-trajectory edges, and a virtual source/sink pair.
struct FlowGraph {
  std::vector<FlowVertex> vertices;
  std::vector<FlowEdge> edges;
  std::vector<int> security;  // vertex indices that must be covered
  int source = -1;
  int sink = -1;

  int vertex_by_id(const std::string& id) const;  // -1 when absent
  // Topological order over the edge relation; throws ValidationError when a
  // cycle exists.
  std::vector<int> topological_order() const;
};

// Assembles the graph: vertices deduplicated by (subteam, time) with kind
// precedence security > start/end > arrival/departure; in-trajectory edges
// chain consecutive same-sub-team vertices at weight -w_t; cross edges carry
// +w_c and their polylines; virtual edges at weight 0 connect the source to
// every first vertex and every last vertex to the sink.
// Throws WeightOrderViolation unless w_c > w_t.
FlowGraph build_flow_graph(const std::vector<std::vector<Checkpoint>>& checkpoints,
                           const std::vector<CrossCandidate>& cross, double w_c, double w_t);

}  // namespace coplan::graph
