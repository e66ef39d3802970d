#include <coplan/flow.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace coplan::flow {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr double kIntTol = 1e-6;
constexpr double kObjTieTol = 1e-9;

enum class LpStatus { optimal, infeasible };

// Dense two-phase primal simplex for
//   min c'x  s.t.  A x (=, <=, >=) b,  x >= 0
// with Bland's rule (smallest entering index; ratio ties to the smallest
// basic index), which guarantees termination. Returns the optimum in x/obj.
LpStatus lp_solve(const Eigen::MatrixXd& A0, const Eigen::VectorXd& b0,
                  const std::vector<char>& type, const Eigen::VectorXd& c0, Eigen::VectorXd& x,
                  double& obj) {
  const int m0 = static_cast<int>(A0.rows());
  const int n = static_cast<int>(A0.cols());

  int n_slack = 0;
  for (char t : type) n_slack += (t != '=');
  const int total = n + n_slack;

  // Standard form [A | slacks], b >= 0 after row sign normalization.
  Eigen::MatrixXd T(m0, total + m0 + 1);
  T.setZero();
  T.block(0, 0, m0, n) = A0;
  {
    int s = n;
    for (int i = 0; i < m0; ++i) {
      if (type[i] == '<') T(i, s++) = 1.0;
      if (type[i] == '>') T(i, s++) = -1.0;
    }
  }
  T.col(total + m0) = b0;
  for (int i = 0; i < m0; ++i) {
    if (T(i, total + m0) < 0) T.row(i) = -T.row(i);
  }
  T.block(0, total, m0, m0).setIdentity();  // artificials

  std::vector<int> basis(m0);
  for (int i = 0; i < m0; ++i) basis[i] = total + i;

  // Reduced-cost row, augmented with the negated objective value.
  Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(total + m0 + 1);
  for (int i = 0; i < m0; ++i) z -= T.row(i);
  z.segment(total, m0).setZero();

  int m = m0;
  auto run = [&](int entering_limit) {
    for (int pivots = 0; pivots < 200000; ++pivots) {
      int col = -1;
      for (int j = 0; j < entering_limit; ++j) {
        if (z(j) < -kPivotTol) {
          col = j;
          break;
        }
      }
      if (col < 0) return true;

      int row = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T(i, col) > kPivotTol) {
          double ratio = T(i, total + m0) / T(i, col);
          if (ratio < best - 1e-12 || (ratio < best + 1e-12 &&
                                       (row < 0 || basis[i] < basis[row]))) {
            best = ratio;
            row = i;
          }
        }
      }
      if (row < 0) throw Error("relaxation is unbounded; the model is malformed");
      T.row(row) /= T(row, col);
      for (int i = 0; i < m; ++i) {
        if (i != row && T(i, col) != 0.0) T.row(i) -= T(i, col) * T.row(row);
      }
      z -= z(col) * T.row(row);
      basis[row] = col;
    }
    throw Error("simplex pivot budget exhausted");
  };

  run(total);  // phase 1
  if (-z(total + m0) > kFeasTol) return LpStatus::infeasible;

  // Drive artificials out of the basis; rows that cannot pivot are redundant.
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= total) {
      int col = -1;
      for (int j = 0; j < total; ++j) {
        if (std::abs(T(i, j)) > kFeasTol) {
          col = j;
          break;
        }
      }
      if (col < 0) continue;  // redundant row
      T.row(i) /= T(i, col);
      for (int k = 0; k < m; ++k) {
        if (k != i && T(k, col) != 0.0) T.row(k) -= T(k, col) * T.row(i);
      }
      basis[i] = col;
    }
    keep.push_back(i);
  }
  if (static_cast<int>(keep.size()) != m) {
    int w = 0;
    std::vector<int> new_basis;
    for (int i : keep) {
      T.row(w++) = T.row(i);
      new_basis.push_back(basis[i]);
    }
    m = w;
    basis = std::move(new_basis);
  }

  // Phase 2 reduced costs from the original objective (slacks cost zero).
  z.setZero();
  z.head(n) = c0.transpose();
  for (int i = 0; i < m; ++i) {
    double cb = basis[i] < n ? c0(basis[i]) : 0.0;
    if (cb != 0.0) z -= cb * T.row(i);
  }
  run(total);

  x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) x(basis[i]) = T(i, total + m0);
  }
  obj = c0.dot(x);
  return LpStatus::optimal;
}

// ---------------------------------------------------------------------------
// Multi-flow coverage model

struct Model {
  const graph::FlowGraph* g = nullptr;
  int K = 0;
  double rho = 0;
  int E = 0;
  std::vector<std::vector<int>> in_edges, out_edges;  // per vertex
  std::vector<int> internal;                          // vertices needing conservation

  int var(int k, int e) const { return k * E + e; }
  double cost(int e) const {
    return (g->edges[e].from == g->source ? 1.0 : 0.0) - rho * g->edges[e].weight;
  }
};

Model make_model(const graph::FlowGraph& g, int K, double rho) {
  Model model;
  model.g = &g;
  model.K = K;
  model.rho = rho;
  model.E = static_cast<int>(g.edges.size());
  int n = static_cast<int>(g.vertices.size());
  model.in_edges.resize(n);
  model.out_edges.resize(n);
  for (int e = 0; e < model.E; ++e) {
    model.out_edges[g.edges[e].from].push_back(e);
    model.in_edges[g.edges[e].to].push_back(e);
  }
  for (int v = 0; v < n; ++v) {
    if (v == g.source || v == g.sink) continue;
    if (!model.in_edges[v].empty() || !model.out_edges[v].empty()) model.internal.push_back(v);
  }
  return model;
}

// Continuous relaxation under the node's 0/1 fixings. Fixed variables fold
// into the right-hand sides. Explicit f <= 1 rows are unnecessary: with at
// most one unit leaving the source per flow, conservation on a DAG already
// caps every edge at one. Returns false when a row is impossible outright.
bool relax(const Model& model, const std::vector<int8_t>& fixing, Eigen::VectorXd& x_full,
           double& obj) {
  const auto& g = *model.g;
  std::vector<int> col_of(model.K * model.E, -1);
  std::vector<int> free_vars;
  for (int v = 0; v < model.K * model.E; ++v) {
    if (fixing[v] < 0) {
      col_of[v] = static_cast<int>(free_vars.size());
      free_vars.push_back(v);
    }
  }
  const int n = static_cast<int>(free_vars.size());

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  std::vector<char> types;
  Eigen::RowVectorXd row(n);

  for (int k = 0; k < model.K; ++k) {
    for (int v : model.internal) {
      row.setZero();
      double b = 0;
      for (int e : model.in_edges[v]) {
        int id = model.var(k, e);
        if (fixing[id] < 0) {
          row(col_of[id]) += 1.0;
        } else {
          b -= fixing[id];
        }
      }
      for (int e : model.out_edges[v]) {
        int id = model.var(k, e);
        if (fixing[id] < 0) {
          row(col_of[id]) -= 1.0;
        } else {
          b += fixing[id];
        }
      }
      if (row.cwiseAbs().sum() == 0.0) {
        if (b != 0.0) return false;
        continue;
      }
      rows.push_back(row);
      rhs.push_back(b);
      types.push_back('=');
    }
    row.setZero();
    double b = 1;
    for (int e : model.out_edges[g.source]) {
      int id = model.var(k, e);
      if (fixing[id] < 0) {
        row(col_of[id]) += 1.0;
      } else {
        b -= fixing[id];
      }
    }
    if (b < 0) return false;
    if (row.cwiseAbs().sum() != 0.0) {
      rows.push_back(row);
      rhs.push_back(b);
      types.push_back('<');
    }
  }
  for (int v : g.security) {
    row.setZero();
    double b = 1;
    for (int k = 0; k < model.K; ++k) {
      for (int e : model.in_edges[v]) {
        int id = model.var(k, e);
        if (fixing[id] < 0) {
          row(col_of[id]) += 1.0;
        } else {
          b -= fixing[id];
        }
      }
    }
    if (b <= 0) continue;  // already covered by fixed edges
    if (row.cwiseAbs().sum() == 0.0) return false;  // uncovered with no options left
    rows.push_back(row);
    rhs.push_back(b);
    types.push_back('>');
  }

  double fixed_cost = 0;
  for (int v = 0; v < model.K * model.E; ++v) {
    if (fixing[v] > 0) fixed_cost += model.cost(v % model.E);
  }

  Eigen::MatrixXd A(rows.size(), n);
  Eigen::VectorXd b(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    A.row(static_cast<int>(i)) = rows[i];
    b(static_cast<int>(i)) = rhs[i];
  }
  Eigen::VectorXd c(n);
  for (int j = 0; j < n; ++j) c(j) = model.cost(free_vars[j] % model.E);

  Eigen::VectorXd x_free;
  double lp_obj = 0;
  if (n == 0) {
    // Everything fixed: rows were all checked or empty.
    for (size_t i = 0; i < rows.size(); ++i) {
      if (types[i] == '=' && rhs[i] != 0.0) return false;
      if (types[i] == '>' && rhs[i] > 0.0) return false;
      if (types[i] == '<' && rhs[i] < 0.0) return false;
    }
  } else {
    if (lp_solve(A, b, types, c, x_free, lp_obj) == LpStatus::infeasible) return false;
  }

  x_full = Eigen::VectorXd::Zero(model.K * model.E);
  for (int v = 0; v < model.K * model.E; ++v) {
    if (fixing[v] >= 0) x_full(v) = fixing[v];
  }
  for (int j = 0; j < n; ++j) x_full(free_vars[j]) = x_free.size() ? x_free(j) : 0.0;
  obj = lp_obj + fixed_cost;
  return true;
}

// Canonical per-flow sorted edge sets, used for deterministic tie-breaking.
std::vector<std::vector<int>> canonical_sets(const Model& model, const Eigen::VectorXd& x) {
  std::vector<std::vector<int>> sets(model.K);
  for (int k = 0; k < model.K; ++k) {
    for (int e = 0; e < model.E; ++e) {
      if (x(model.var(k, e)) > 0.5) sets[k].push_back(e);
    }
  }
  return sets;
}

bool lex_less(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b) {
  for (size_t k = 0; k < a.size() && k < b.size(); ++k) {
    if (a[k] != b[k])
      return std::lexicographical_compare(a[k].begin(), a[k].end(), b[k].begin(), b[k].end());
  }
  return a.size() < b.size();
}

// Orders one flow's edge set as the source-to-sink path it must form.
std::vector<int> order_as_path(const graph::FlowGraph& g, std::vector<int> edges) {
  if (edges.empty()) return edges;
  std::vector<int> out_of(g.vertices.size(), -1);
  for (int e : edges) {
    if (out_of[g.edges[e].from] != -1)
      throw Error("flow is not a simple path: vertex with two outgoing units");
    out_of[g.edges[e].from] = e;
  }
  std::vector<int> path;
  int v = g.source;
  while (v != g.sink) {
    int e = out_of[v];
    if (e < 0) throw Error("flow is not a source-to-sink path");
    path.push_back(e);
    v = g.edges[e].to;
  }
  if (path.size() != edges.size()) throw Error("flow contains edges off its path");
  return path;
}

double exact_objective(const Model& model, const std::vector<std::vector<int>>& sets) {
  double obj = 0;
  for (const auto& set : sets) {
    for (int e : set) obj += model.cost(e);
  }
  return obj;
}

}  // namespace

FlowSolution solve_cover(const graph::FlowGraph& g, int K, double rho_flow) {
  if (K < 1) throw ValidationError("K", "must be at least 1");
  if (rho_flow < 0) throw ValidationError("rho", "must be non-negative");
  g.topological_order();  // rejects cyclic graphs
  Model model = make_model(g, K, rho_flow);
  const int nvars = K * model.E;

  bool have_incumbent = false;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> best_sets;

  std::vector<std::vector<int8_t>> stack;
  stack.emplace_back(nvars, int8_t{-1});

  Eigen::VectorXd x;
  double bound = 0;
  while (!stack.empty()) {
    std::vector<int8_t> fixing = std::move(stack.back());
    stack.pop_back();

    if (!relax(model, fixing, x, bound)) continue;
    if (have_incumbent && bound > best_obj + kObjTieTol) continue;

    // Most fractional free variable; ties by edge index, then flow index.
    int branch = -1;
    double most = kIntTol;
    for (int e = 0; e < model.E; ++e) {
      for (int k = 0; k < K; ++k) {
        int v = model.var(k, e);
        if (fixing[v] >= 0) continue;
        double d = std::min(x(v), 1.0 - x(v));
        if (d > most + 1e-12) {
          most = d;
          branch = v;
        }
      }
    }

    if (branch < 0) {  // integral
      auto sets = canonical_sets(model, x);
      double value = exact_objective(model, sets);
      if (!have_incumbent || value < best_obj - kObjTieTol ||
          (std::abs(value - best_obj) <= kObjTieTol && lex_less(sets, best_sets))) {
        have_incumbent = true;
        best_obj = value;
        best_sets = std::move(sets);
      }
      continue;
    }

    auto one = fixing;
    one[branch] = 1;
    stack.push_back(std::move(one));
    fixing[branch] = 0;
    stack.push_back(std::move(fixing));  // explored first
  }

  if (!have_incumbent)
    throw FlowInfeasible("no assignment of " + std::to_string(K) +
                         " flow(s) covers every security checkpoint");

  FlowSolution s;
  s.K = K;
  s.objective = best_obj;
  for (int k = 0; k < K; ++k) {
    s.flows.push_back(order_as_path(g, best_sets[k]));
    if (s.flows.back().empty()) s.empty_flows.push_back(k);
  }
  return s;
}

void validate_rho(const graph::FlowGraph& g, double rho_flow) {
  if (rho_flow <= 0) throw ValidationError("rho", "must be positive");
  std::vector<int> order = g.topological_order();
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.vertices.size(), ninf);
  dist[g.source] = 0;
  for (int v : order) {
    if (dist[v] == ninf) continue;
    for (const auto& e : g.edges) {
      if (e.from == v) dist[e.to] = std::max(dist[e.to], dist[v] + e.weight);
    }
  }
  double w_star = dist[g.sink];
  if (w_star == ninf) return;  // no path at all; nothing to bound
  if (rho_flow * w_star >= 1.0)
    throw RhoTooLarge("rho * max path weight = " + std::to_string(rho_flow * w_star) +
                          " must stay below 1; admissible bound is " +
                          std::to_string(1.0 / w_star),
                      1.0 / w_star);
}

std::pair<int, FlowSolution> minimal_robots(const graph::FlowGraph& g, double rho_flow,
                                            int K_max) {
  if (K_max < 1) throw ValidationError("K_max", "must be at least 1");
  validate_rho(g, rho_flow);

  auto finish = [&](FlowSolution s) {
    FlowSolution trimmed;
    trimmed.objective = s.objective;
    for (int k = 0; k < s.K; ++k) {
      if (!s.flows[k].empty()) trimmed.flows.push_back(std::move(s.flows[k]));
    }
    trimmed.K = static_cast<int>(trimmed.flows.size());
    return std::make_pair(trimmed.K, std::move(trimmed));
  };

  for (int K = 1; K <= K_max; ++K) {
    FlowSolution s;
    try {
      s = solve_cover(g, K, rho_flow);
    } catch (const FlowInfeasible&) {
      continue;
    }
    // Keep increasing until a flow stays empty, which certifies minimality;
    // an extra flow always stays empty because every path costs more than
    // its reward once validate_rho holds.
    while (s.empty_flows.empty() && K < K_max) {
      FlowSolution next = solve_cover(g, ++K, rho_flow);
      if (next.empty_flows.empty() && next.objective > s.objective - kObjTieTol) break;
      s = std::move(next);
    }
    return finish(std::move(s));
  }
  throw FlowInfeasible("no feasible cover within K_max = " + std::to_string(K_max) + " flows");
}

VerifyReport verify_solution(const graph::FlowGraph& g, const FlowSolution& s, double rho_flow) {
  VerifyReport report;
  auto complain = [&report](std::string text) {
    report.ok = false;
    report.violations.push_back(std::move(text));
  };

  int E = static_cast<int>(g.edges.size());
  std::vector<int> covered(g.vertices.size(), 0);
  for (int k = 0; k < static_cast<int>(s.flows.size()); ++k) {
    std::vector<int> in(g.vertices.size(), 0), out(g.vertices.size(), 0);
    std::vector<int> seen;
    for (int e : s.flows[k]) {
      if (e < 0 || e >= E) {
        complain("flow " + std::to_string(k) + ": edge index " + std::to_string(e) +
                 " out of range");
        continue;
      }
      if (std::find(seen.begin(), seen.end(), e) != seen.end()) {
        complain("flow " + std::to_string(k) + ": edge " + std::to_string(e) + " used twice");
        continue;
      }
      seen.push_back(e);
      ++out[g.edges[e].from];
      ++in[g.edges[e].to];
      report.recomputed_objective +=
          (g.edges[e].from == g.source ? 1.0 : 0.0) - rho_flow * g.edges[e].weight;
    }
    if (s.flows[k].empty()) continue;
    for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
      int balance = in[v] - out[v];
      int expected = v == g.source ? -1 : (v == g.sink ? 1 : 0);
      if (balance != expected)
        complain("flow " + std::to_string(k) + ": conservation violated at " + g.vertices[v].id +
                 " (in " + std::to_string(in[v]) + ", out " + std::to_string(out[v]) + ")");
      if (v != g.source && v != g.sink && (in[v] > 1 || out[v] > 1))
        complain("flow " + std::to_string(k) + ": vertex " + g.vertices[v].id +
                 " carries more than one unit");
      if (in[v] > 0) ++covered[v];
    }
    if (out[g.source] > 1)
      complain("flow " + std::to_string(k) + ": more than one unit leaves the source");
  }
  for (int v : g.security) {
    if (covered[v] == 0) complain("coverage: security vertex " + g.vertices[v].id + " uncovered");
  }
  if (std::abs(report.recomputed_objective - s.objective) > 1e-9)
    complain("objective mismatch: reported " + std::to_string(s.objective) + ", recomputed " +
             std::to_string(report.recomputed_objective));
  return report;
}

}  // namespace coplan::flow
