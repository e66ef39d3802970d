#include "coplan/admm.hpp"

#include <cmath>
#include <deque>

namespace coplan::admm {

SmoothObjective SmoothObjective::zero() {
  SmoothObjective obj;
  obj.value = [](const Trajectories&) { return 0.0; };
  obj.value_and_gradient = [](const Trajectories& q) {
    return std::make_pair(0.0, Trajectories::Storage::Zero(q.raw().rows(), q.raw().cols()));
  };
  return obj;
}

Trajectories straight_line(const std::vector<Vec3>& starts, const std::vector<Vec3>& goals,
                           int horizon, int dim) {
  if (starts.size() != goals.size() || starts.empty())
    throw ValidationError("init", "starts and goals must pair up");
  Trajectories q(static_cast<int>(starts.size()), horizon, dim);
  for (int r = 0; r < q.robots(); ++r) {
    for (int t = 0; t <= horizon; ++t) {
      double s = static_cast<double>(t) / horizon;
      Vec3 p = (1 - s) * starts[r] + s * goals[r];
      q.at(r, t) = p.head(dim).transpose();
    }
  }
  return q;
}

Eigen::VectorXd stacked_values(const std::vector<constraints::BlockPtr>& blocks,
                               const Trajectories& q, bool* any_infeasible) {
  int total = 0;
  for (const auto& b : blocks) total += b->output_dim();
  Eigen::VectorXd out(total);
  int off = 0;
  if (any_infeasible) *any_infeasible = false;
  for (const auto& b : blocks) {
    constraints::BlockEval ev = b->evaluate(q);
    out.segment(off, b->output_dim()) = ev.value;
    if (ev.infeasible && any_infeasible) *any_infeasible = true;
    off += b->output_dim();
  }
  return out;
}

namespace {

// Free-coordinate view of the waypoint grid: all rows, minus each robot's
// first and last waypoint when endpoints are pinned.
struct FreeVars {
  std::vector<Eigen::Index> rows;
  int dim = 0;

  FreeVars(const Trajectories& q, bool pin_endpoints) : dim(q.dim()) {
    for (int r = 0; r < q.robots(); ++r) {
      for (int t = 0; t <= q.horizon(); ++t) {
        if (pin_endpoints && (t == 0 || t == q.horizon())) continue;
        rows.push_back(q.index(r, t));
      }
    }
  }

  Eigen::VectorXd gather(const Trajectories::Storage& m) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(rows.size()) * dim);
    for (size_t i = 0; i < rows.size(); ++i)
      x.segment(static_cast<Eigen::Index>(i) * dim, dim) = m.row(rows[i]).transpose();
    return x;
  }

  void scatter(const Eigen::VectorXd& x, Trajectories::Storage& m) const {
    for (size_t i = 0; i < rows.size(); ++i)
      m.row(rows[i]) = x.segment(static_cast<Eigen::Index>(i) * dim, dim).transpose();
  }
};

// Augmented objective and its gradient over the free coordinates.
struct AugmentedObjective {
  const SmoothObjective& objective;
  const std::vector<constraints::BlockPtr>& blocks;
  const Eigen::VectorXd& z;
  const Eigen::VectorXd& u;
  double rho;
  const FreeVars& free_vars;
  Trajectories scratch;  // pinned rows stay at their input values

  double value(const Eigen::VectorXd& x) {
    free_vars.scatter(x, scratch.raw());
    double f = objective.value(scratch);
    Eigen::VectorXd d = stacked_values(blocks, scratch);
    return f + 0.5 * rho * (d - z + u).squaredNorm();
  }

  std::pair<double, Eigen::VectorXd> value_and_gradient(const Eigen::VectorXd& x) {
    free_vars.scatter(x, scratch.raw());
    auto [f, grad] = objective.value_and_gradient(scratch);
    Eigen::VectorXd d = stacked_values(blocks, scratch);
    Eigen::VectorXd w = d - z + u;
    double val = f + 0.5 * rho * w.squaredNorm();
    int off = 0;
    for (const auto& b : blocks) {
      b->accumulate_gradient(scratch, rho * w.segment(off, b->output_dim()), grad);
      off += b->output_dim();
    }
    return {val, free_vars.gather(grad)};
  }
};

}  // namespace

Trajectories q_update(const Trajectories& q, const SmoothObjective& objective,
                      const std::vector<constraints::BlockPtr>& blocks, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& u, double rho, int budget, bool pin_endpoints,
                      int* stall_count) {
  FreeVars fv(q, pin_endpoints);
  if (fv.rows.empty()) return q;
  AugmentedObjective aug{objective, blocks, z, u, rho, fv, q};

  Eigen::VectorXd x = fv.gather(q.raw());
  auto [f, g] = aug.value_and_gradient(x);

  // limited-memory quasi-Newton with curvature history
  const int memory = 8;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int it = 0; it < budget; ++it) {
    if (g.norm() <= 1e-10 * std::max(1.0, x.norm())) break;

    // two-loop recursion
    Eigen::VectorXd p = -g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(p);
      p -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      p *= gamma;
    } else {
      p /= std::max(1.0, g.norm());  // conservative first step
    }
    for (size_t i = 0; i < s_hist.size(); ++i) {
      double beta = rho_hist[i] * y_hist[i].dot(p);
      p += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(p);
    if (slope >= 0) {  // history gave a non-descent direction: restart
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      p = -g / std::max(1.0, g.norm());
      slope = g.dot(p);
    }

    // backtracking to sufficient decrease
    double step = 1.0;
    bool accepted = false;
    double f_new = f;
    Eigen::VectorXd x_new;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + step * p;
      f_new = aug.value(x_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (stall_count) ++(*stall_count);
      break;  // keep the best point found so far
    }

    auto [f_next, g_next] = aug.value_and_gradient(x_new);
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_next - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(x_new);
    f = f_next;
    g = std::move(g_next);
  }

  Trajectories out = q;
  fv.scatter(x, out.raw());
  return out;
}

Residuals residuals(const Eigen::VectorXd& dq, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& z_prev, double rho) {
  return {(dq - z).norm(), (rho * (z - z_prev)).norm()};
}

AdmmResult solve(const Trajectories& initial, const SmoothObjective& objective,
                 const std::vector<constraints::BlockPtr>& blocks, const AdmmParams& params) {
  if (params.rho <= 0) throw ValidationError("admm", "rho must be positive");
  AdmmResult result;
  result.trajectories = initial;

  int dim_z = 0;
  for (const auto& b : blocks) dim_z += b->output_dim();
  result.residual_dim = dim_z;
  if (dim_z == 0) {
    // purely smooth problem: one primal update decides it
    result.trajectories = q_update(initial, objective, blocks, Eigen::VectorXd(),
                                   Eigen::VectorXd(), params.rho, params.inner_budget,
                                   params.pin_endpoints, &result.line_search_stalls);
    result.status = SolveStatus::converged;
    result.iterations = 1;
    return result;
  }

  const double tol_pri = params.eps_pri * std::sqrt(static_cast<double>(dim_z));
  const double tol_dual = params.eps_dual * std::sqrt(static_cast<double>(dim_z));

  Eigen::VectorXd z = stacked_values(blocks, initial);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dim_z);

  Trajectories q = initial;
  for (int k = 0; k < params.max_iter; ++k) {
    q = q_update(q, objective, blocks, z, u, params.rho, params.inner_budget,
                 params.pin_endpoints, &result.line_search_stalls);

    Eigen::VectorXd d = stacked_values(blocks, q);
    Eigen::VectorXd z_prev = z;
    int off = 0;
    for (const auto& b : blocks) {
      z.segment(off, b->output_dim()) = b->project(d.segment(off, b->output_dim()) +
                                                   u.segment(off, b->output_dim()));
      off += b->output_dim();
    }
    u += d - z;

    Residuals res = residuals(d, z, z_prev, params.rho);
    result.primal_history.push_back(res.primal);
    result.dual_history.push_back(res.dual);
    result.iterations = k + 1;
    if (res.primal <= tol_pri && res.dual <= tol_dual) {
      result.status = SolveStatus::converged;
      break;
    }
  }

  result.trajectories = q;
  bool infeasible = false;
  int off = 0;
  Eigen::VectorXd d_final(dim_z);
  for (const auto& b : blocks) {
    constraints::BlockEval ev = b->evaluate(q);
    d_final.segment(off, b->output_dim()) = ev.value;
    BlockReport report;
    report.label = b->label();
    report.violation = (ev.value - b->project(ev.value)).norm();
    report.infeasible = ev.infeasible;
    infeasible = infeasible || ev.infeasible;
    result.blocks.push_back(std::move(report));
    off += b->output_dim();
  }
  result.any_infeasible = infeasible;
  return result;
}

}  // namespace coplan::admm
