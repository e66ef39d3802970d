#pragma once

#include <string>
#include <utility>
#include <vector>

#include <coplan/checkpoint_graph.hpp>
#include <coplan/types.hpp>

namespace coplan::flow {

// Result of the multi-flow coverage optimization. Each flow is either empty
// or a single unit source-to-sink path; flows may share edges.
struct FlowSolution {
  int K = 0;                            // flows requested (including empty ones)
  std::vector<std::vector<int>> flows;  // per flow: edge indices in path order
  double objective = 0;
  std::vector<int> empty_flows;         // indices of all-zero flows
};

// Exact minimizer of
//   sum_k (source-out of flow k)  -  rho_flow * sum_k sum_ij w_ij f^k_ij
// over binary edge indicators with per-flow conservation at every internal
// vertex, at most one unit leaving the source per flow, and every security
// vertex covered by at least one flow. Branch-and-bound over the fractional
// relaxation (dense two-phase simplex, Bland's rule); ties on the optimal
// objective resolve to the lexicographically smallest flow-edge set.
// Throws FlowInfeasible when no K-flow assignment covers the security set.
FlowSolution solve_cover(const graph::FlowGraph& g, int K, double rho_flow);

// Enforces that every source-to-sink path weight W satisfies rho_flow*W < 1,
// via DAG longest-path. Throws RhoTooLarge carrying the admissible bound
// 1/W* when violated.
void validate_rho(const graph::FlowGraph& g, double rho_flow);

// Increments K from 1 until coverage becomes feasible, then confirms with
// one extra flow (which stays empty when K already suffices). Returns the
// number of non-empty flows and the solution with empty flows discarded.
// Throws FlowInfeasible when K_max is exhausted.
std::pair<int, FlowSolution> minimal_robots(const graph::FlowGraph& g, double rho_flow,
                                            int K_max);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> violations;
  double recomputed_objective = 0;
};

// Re-derives conservation, integrality (edge sets are well-formed paths),
// coverage, and the objective from scratch, independent of solver state.
VerifyReport verify_solution(const graph::FlowGraph& g, const FlowSolution& s, double rho_flow);

}  // namespace coplan::flow
