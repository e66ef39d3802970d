#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <coplan/geometry.hpp>
#include <coplan/types.hpp>

namespace coplan::rrt {

// Free-space description used for sampling-based planning. Obstacles are
// convex polygons in the xy-plane; in 3-D worlds they act as infinite prisms
// along z, matching how blocked regions constrain planar motion.
struct World {
  int dimension = 2;  // 2 or 3
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
  std::vector<geometry::ConvexPolygon> obstacles;

  // True when p lies inside the bounds and strictly outside every obstacle.
  bool position_free(const Vec3& p) const;
  // True when the closed segment [a,b] stays clear of every obstacle. Bounds
  // are not re-checked: a segment between in-bounds points stays in the box.
  bool segment_free(const Vec3& a, const Vec3& b) const;
};

struct TreeParams {
  double step = 0.5;          // max extension length per iteration (m)
  double gamma = 6.8;         // rewire-radius constant: r = gamma*(log n / n)^(1/dim)
  int max_iter = 4000;        // number of sampling iterations
  double goal_tolerance = 0.3;  // default query tolerance (m)
  std::uint32_t seed = 1;     // RNG seed; fixed seed gives a bit-identical tree
};

// Shortest-path tree rooted at a fixed position. Node 0 is the root; every
// other node stores its parent index and the accumulated path length from
// the root along parent links.
struct PlanTree {
  Vec3 root = Vec3::Zero();
  std::vector<Vec3> nodes;     // nodes[0] == root
  std::vector<int> parent;     // parent[0] == -1
  std::vector<double> cost;    // cost[0] == 0
  std::uint32_t rng_seed = 0;
};

// Grows an optimizing rapidly-exploring random tree: each iteration samples
// the workspace uniformly, steers from the nearest node by at most
// params.step, connects through the cheapest collision-free neighbour inside
// the shrinking radius, and rewires neighbours through the new node whenever
// that shortens their path. Deterministic for a fixed seed.
// Throws RootInCollision when the root is not in free space.
PlanTree grow_tree(const Vec3& root, const World& world, const TreeParams& params);

struct PathResult {
  std::vector<Vec3> path;  // root-to-target order, starting at tree.root
  double cost = 0;         // accumulated length of the parent chain (m)
};

// Returns the parent-chain to the node nearest to target among nodes within
// tolerance of it (ties resolved toward the smallest node index), or nullopt
// when no node qualifies.
std::optional<PathResult> query_path(const PlanTree& tree, const Vec3& target, double tolerance);

}  // namespace coplan::rrt
