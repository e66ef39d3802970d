#include <coplan/rrt.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace coplan::rrt {

namespace {

constexpr double kCostTieTol = 1e-12;

double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Nearest node by Euclidean distance; ties go to the smallest index because
// the scan keeps the first minimum.
int nearest_node(const std::vector<Vec3>& nodes, const Vec3& p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    double d = distance(nodes[i], p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

bool World::position_free(const Vec3& p) const {
  for (int d = 0; d < dimension; ++d) {
    if (p[d] < lo[d] || p[d] > hi[d]) return false;
  }
  for (const auto& poly : obstacles) {
    if (poly.contains(p)) return false;
  }
  return true;
}

bool World::segment_free(const Vec3& a, const Vec3& b) const {
  for (const auto& poly : obstacles) {
    if (poly.segment_intersects(a, b)) return false;
  }
  return true;
}

PlanTree grow_tree(const Vec3& root, const World& world, const TreeParams& params) {
  if (world.dimension != 2 && world.dimension != 3)
    throw ValidationError("world.dimension", "must be 2 or 3");
  if (params.step <= 0) throw ValidationError("rrt.step", "must be positive");
  if (params.max_iter < 0) throw ValidationError("rrt.max_iter", "must be non-negative");
  if (!world.position_free(root))
    throw RootInCollision("tree root lies inside an obstacle or outside the workspace");

  PlanTree tree;
  tree.root = root;
  tree.rng_seed = params.seed;
  tree.nodes.push_back(root);
  tree.parent.push_back(-1);
  tree.cost.push_back(0.0);
  std::vector<std::vector<int>> children(1);

  std::mt19937 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double inv_dim = 1.0 / world.dimension;

  std::vector<int> neighbors;
  std::vector<int> stack;
  for (int iter = 0; iter < params.max_iter; ++iter) {
    Vec3 sample = Vec3::Zero();
    for (int d = 0; d < world.dimension; ++d)
      sample[d] = world.lo[d] + (world.hi[d] - world.lo[d]) * unit(rng);

    int nearest = nearest_node(tree.nodes, sample);
    Vec3 from = tree.nodes[nearest];
    double d = distance(from, sample);
    Vec3 fresh = d <= params.step ? sample : Vec3(from + (params.step / d) * (sample - from));
    if (!world.segment_free(from, fresh)) continue;

    int n = static_cast<int>(tree.nodes.size());
    double radius =
        n > 1 ? params.gamma * std::pow(std::log(double(n)) / double(n), inv_dim) : 0.0;

    neighbors.clear();
    for (int i = 0; i < n; ++i) {
      if (distance(tree.nodes[i], fresh) <= radius) neighbors.push_back(i);
    }

    // Cheapest collision-free connection; the nearest node is always a
    // candidate so growth never stalls when the radius is small.
    int best_parent = nearest;
    double best_cost = tree.cost[nearest] + distance(from, fresh);
    for (int i : neighbors) {
      if (i == nearest) continue;
      double c = tree.cost[i] + distance(tree.nodes[i], fresh);
      if (c < best_cost - kCostTieTol && world.segment_free(tree.nodes[i], fresh)) {
        best_cost = c;
        best_parent = i;
      }
    }

    int fresh_index = n;
    tree.nodes.push_back(fresh);
    tree.parent.push_back(best_parent);
    tree.cost.push_back(best_cost);
    children.emplace_back();
    children[best_parent].push_back(fresh_index);

    // Rewire: route neighbours through the new node when that is shorter.
    for (int i : neighbors) {
      if (i == best_parent) continue;
      double via = best_cost + distance(fresh, tree.nodes[i]);
      if (via < tree.cost[i] - kCostTieTol && world.segment_free(fresh, tree.nodes[i])) {
        int old_parent = tree.parent[i];
        auto& sibs = children[old_parent];
        sibs.erase(std::find(sibs.begin(), sibs.end(), i));
        tree.parent[i] = fresh_index;
        children[fresh_index].push_back(i);
        double delta = via - tree.cost[i];
        // Propagate the improvement through the whole subtree.
        stack.assign(1, i);
        while (!stack.empty()) {
          int v = stack.back();
          stack.pop_back();
          tree.cost[v] += delta;
          for (int child : children[v]) stack.push_back(child);
        }
      }
    }
  }
  return tree;
}

std::optional<PathResult> query_path(const PlanTree& tree, const Vec3& target, double tolerance) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
    double d = distance(tree.nodes[i], target);
    if (d <= tolerance && d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best < 0) return std::nullopt;

  PathResult result;
  result.cost = tree.cost[best];
  for (int v = best; v >= 0; v = tree.parent[v]) result.path.push_back(tree.nodes[v]);
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

}  // namespace coplan::rrt
