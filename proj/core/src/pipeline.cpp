#include "coplan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "coplan/admm.hpp"
#include "coplan/checkpoint_graph.hpp"
#include "coplan/constraints.hpp"
#include "coplan/flow.hpp"
#include "coplan/geometry.hpp"
#include "coplan/objective.hpp"
#include "coplan/rrt.hpp"

namespace coplan::pipeline {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

objective::FieldGrid make_grid(const scenario::Scenario& s) {
  auto grid = objective::FieldGrid::regular(s.workspace_min, s.workspace_max, s.grid.nx, s.grid.ny);
  grid.initial_covariance = s.grid.initial_covariance;
  grid.process_noise = s.grid.process_noise;
  grid.sigma_meas = s.grid.sigma_meas;
  grid.ell = s.grid.ell;
  grid.validate();
  return grid;
}

admm::SmoothObjective coverage_objective(objective::FieldGrid grid) {
  admm::SmoothObjective obj;
  obj.value = [grid](const Trajectories& q) { return objective::objective_value(grid, q); };
  obj.value_and_gradient = [grid](const Trajectories& q) {
    auto eval = objective::objective_value_and_gradient(grid, q);
    return std::make_pair(eval.value, std::move(eval.gradient));
  };
  return obj;
}

// Velocity caps, workspace box, and region avoidance for every robot-step,
// in a fixed order so the stacked copy-variable layout is reproducible.
std::vector<constraints::BlockPtr> base_blocks(const scenario::Scenario& s) {
  std::vector<constraints::BlockPtr> blocks;
  const int dim = s.dimension, T = s.horizon;
  for (int r = 0; r < static_cast<int>(s.robots.size()); ++r) {
    for (int t = 0; t < T; ++t) blocks.push_back(constraints::velocity_block(r, t, s.v_max, dim));
    for (int t = 0; t <= T; ++t)
      blocks.push_back(constraints::workspace_block(r, t, s.workspace_min, s.workspace_max, dim));
    for (size_t o = 0; o < s.obstacles.size(); ++o) {
      for (int t = 0; t <= T; ++t)
        blocks.push_back(constraints::obstacle_block(
            r, t, s.obstacles[o], dim,
            "obstacle[r=" + std::to_string(r) + ",t=" + std::to_string(t) + ",poly=" +
                std::to_string(o) + "]"));
    }
    for (size_t o = 0; o < s.forbidden.size(); ++o) {
      for (int t = 0; t <= T; ++t)
        blocks.push_back(constraints::obstacle_block(
            r, t, s.forbidden[o], dim,
            "forbidden[r=" + std::to_string(r) + ",t=" + std::to_string(t) + ",poly=" +
                std::to_string(o) + "]"));
    }
  }
  return blocks;
}

// Ascending times at which `robot` appears in the co-observation schedule.
std::vector<int> meeting_times(const scenario::Scenario& s, int robot) {
  std::set<int> times;
  for (const auto& e : s.co_observations) {
    if (e.robot_a == robot || e.robot_b == robot) times.insert(e.time);
  }
  return {times.begin(), times.end()};
}

void fill_admm_record(io::RunRecord& rec, const admm::AdmmResult& result) {
  rec.status = result.status == admm::SolveStatus::converged ? "converged" : "diverged";
  rec.iterations = result.iterations;
  rec.residual_dim = result.residual_dim;
  rec.primal_history = result.primal_history;
  rec.dual_history = result.dual_history;
  const admm::BlockReport* worst = nullptr;
  for (const auto& block : result.blocks) {
    if (block.violation > 1e-12 || block.infeasible)
      rec.block_violations.emplace_back(block.label, block.violation);
    if (!worst || block.violation > worst->violation) worst = &block;
  }
  if (result.status != admm::SolveStatus::converged && worst)
    rec.notes.push_back("worst constraint violation: " + worst->label + " (" +
                        fmt(worst->violation) + ")");
}

void init_record(io::RunRecord& rec, const scenario::Scenario& s, const std::string& stage,
                 const std::string& input_bytes) {
  rec.stage = stage;
  rec.input_hash = io::hex64(io::fnv1a64(input_bytes));
  rec.admm_seed = s.admm_seed;
  rec.rrt_seed = s.rrt.seed;
  rec.scenario_json = scenario::scenario_to_json(s);
  rec.warnings = s.warnings;
}

Trajectories initial_guess(const scenario::Scenario& s) {
  std::vector<Vec3> starts, goals;
  for (const auto& r : s.robots) {
    starts.push_back(r.start);
    goals.push_back(r.goal);
  }
  return admm::straight_line(starts, goals, s.horizon, s.dimension);
}

// Post-solve security re-check, independent of the optimizer's bookkeeping.
// Appends one summary line per passing family and one line per failure.
bool verify_security(const scenario::Scenario& s, const Trajectories& q,
                     std::vector<std::string>& checks) {
  bool ok = true;
  const double tol = 1e-6;

  int velocity_failures = 0, velocity_total = 0;
  for (int r = 0; r < q.robots(); ++r) {
    for (int t = 0; t < q.horizon(); ++t) {
      ++velocity_total;
      double d = (q.at3(r, t + 1) - q.at3(r, t)).norm();
      if (d > s.v_max + tol) {
        ++velocity_failures;
        checks.push_back("FAIL: step r=" + std::to_string(r) + ",t=" + std::to_string(t) +
                         " length " + fmt(d) + " exceeds v_max " + fmt(s.v_max));
      }
    }
  }
  if (velocity_failures == 0)
    checks.push_back("pass: all " + std::to_string(velocity_total) + " steps within v_max " +
                     fmt(s.v_max));
  ok = ok && velocity_failures == 0;

  for (const auto& e : s.co_observations) {
    double d = (q.at3(e.robot_a, e.time) - q.at3(e.robot_b, e.time)).norm();
    std::string what = "meeting a=" + std::to_string(e.robot_a) + ",b=" +
                       std::to_string(e.robot_b) + ",t=" + std::to_string(e.time) +
                       " distance " + fmt(d) + " vs d_max " + fmt(e.d_max);
    if (d <= e.d_max + tol) {
      checks.push_back("pass: " + what);
    } else {
      checks.push_back("FAIL: " + what);
      ok = false;
    }
  }

  for (int r = 0; r < q.robots(); ++r) {
    auto times = meeting_times(s, r);
    for (size_t i = 0; i + 1 < times.size(); ++i) {
      for (size_t f = 0; f < s.forbidden.size(); ++f) {
        std::string what = "envelope r=" + std::to_string(r) + ",t=" + std::to_string(times[i]) +
                           ".." + std::to_string(times[i + 1]) + " vs forbidden[" +
                           std::to_string(f) + "]";
        try {
          auto e = geometry::ReachabilityEllipsoid::from_waypoints(
              q.at3(r, times[i]), q.at3(r, times[i + 1]), times[i], times[i + 1], s.v_max);
          if (geometry::ellipsoid_region_intersects(e, s.forbidden[f])) {
            checks.push_back("FAIL: " + what + " intersects");
            ok = false;
          } else {
            checks.push_back("pass: " + what + " disjoint");
          }
        } catch (const InfeasibleVelocity&) {
          checks.push_back("FAIL: " + what + " has no feasible envelope");
          ok = false;
        }
      }
    }
  }
  return ok;
}

StageOutcome run_admm_stage(const scenario::Scenario& s, const std::string& input_bytes,
                            bool secured) {
  StageOutcome out;
  out.artifacts.scen = &s;
  out.artifacts.draw_envelopes = secured;
  auto& rec = out.artifacts.record;
  init_record(rec, s, secured ? "secure" : "plan", input_bytes);

  try {
    auto blocks = base_blocks(s);
    if (secured) {
      for (const auto& e : s.co_observations)
        blocks.push_back(constraints::co_observation_block(e, s.dimension));
      for (int r = 0; r < static_cast<int>(s.robots.size()); ++r) {
        auto times = meeting_times(s, r);
        for (size_t i = 0; i + 1 < times.size(); ++i) {
          for (size_t f = 0; f < s.forbidden.size(); ++f)
            blocks.push_back(constraints::reach_polygon_block(
                r, times[i], times[i + 1], s.v_max, s.forbidden[f], s.dimension,
                "reach[r=" + std::to_string(r) + ",t=" + std::to_string(times[i]) + ".." +
                    std::to_string(times[i + 1]) + ",forbidden=" + std::to_string(f) + "]"));
        }
      }
    }

    auto result = admm::solve(initial_guess(s), coverage_objective(make_grid(s)), blocks, s.admm);
    fill_admm_record(rec, result);
    out.log.push_back(rec.stage + ": " + rec.status + " after " +
                      std::to_string(result.iterations) + " iteration(s)");

    if (secured) {
      rec.security_ok = verify_security(s, result.trajectories, rec.security_checks);
      out.log.push_back("security re-check: " + std::string(rec.security_ok ? "pass" : "FAIL"));
    }
    out.artifacts.trajectories = std::move(result.trajectories);

    if (result.status != admm::SolveStatus::converged) {
      out.exit_code = kExitDiverged;
    } else if (secured && !rec.security_ok) {
      rec.status = "verification-failed";
      out.exit_code = kExitSecurityFailed;
    }
  } catch (const ValidationError& e) {
    rec.status = "validation-error";
    rec.notes.push_back(e.what());
    out.log.push_back(rec.stage + ": " + e.what());
    out.exit_code = kExitValidation;
  }
  return out;
}

}  // namespace

StageOutcome run_plan(const scenario::Scenario& s, const std::string& input_bytes) {
  return run_admm_stage(s, input_bytes, false);
}

StageOutcome run_secure(const scenario::Scenario& s, const std::string& input_bytes) {
  return run_admm_stage(s, input_bytes, true);
}

StageOutcome run_ctco(const scenario::Scenario& s, const Trajectories& trajectories,
                      const std::string& input_bytes) {
  StageOutcome out;
  out.artifacts.scen = &s;
  out.artifacts.trajectories = trajectories;
  auto& rec = out.artifacts.record;
  init_record(rec, s, "ctco", input_bytes);

  try {
    if (trajectories.robots() != static_cast<int>(s.robots.size()))
      throw ValidationError("trajectories",
                            "robot count does not match the scenario (" +
                                std::to_string(trajectories.robots()) + " vs " +
                                std::to_string(s.robots.size()) + ")");
    if (trajectories.horizon() != s.horizon)
      throw ValidationError("trajectories", "horizon does not match the scenario (" +
                                                std::to_string(trajectories.horizon()) + " vs " +
                                                std::to_string(s.horizon) + ")");
    if (trajectories.dim() != s.dimension)
      throw ValidationError("trajectories", "dimension does not match the scenario");

    std::vector<graph::Waypoints> lines;
    for (int r = 0; r < trajectories.robots(); ++r) {
      graph::Waypoints w;
      for (int t = 0; t <= trajectories.horizon(); ++t) w.push_back(trajectories.at3(r, t));
      lines.push_back(std::move(w));
    }

    std::vector<std::vector<graph::Checkpoint>> checkpoints;
    int security_count = 0;
    for (int r = 0; r < trajectories.robots(); ++r) {
      checkpoints.push_back(graph::generate_checkpoints(lines[r], r, s.forbidden, s.v_max));
      for (const auto& cp : checkpoints.back())
        security_count += cp.kind == graph::VertexKind::security ? 1 : 0;
    }
    out.log.push_back("checkpoints: " + std::to_string(security_count) +
                      " interior security vertex/vertices");

    rrt::World world;
    world.dimension = s.dimension;
    world.lo = s.workspace_min;
    world.hi = s.workspace_max;
    world.obstacles = s.obstacles;
    world.obstacles.insert(world.obstacles.end(), s.forbidden.begin(), s.forbidden.end());

    std::vector<graph::CrossCandidate> candidates;
    for (const auto& team : checkpoints) {
      for (const auto& cp : team) {
        auto edges = graph::find_cross_edges(cp, lines, world, s.forbidden, s.v_max, s.rrt);
        candidates.insert(candidates.end(), edges.arrivals.begin(), edges.arrivals.end());
        candidates.insert(candidates.end(), edges.departures.begin(), edges.departures.end());
      }
    }
    out.log.push_back("cross candidates: " + std::to_string(candidates.size()));

    auto g = graph::build_flow_graph(checkpoints, candidates, s.flow.w_c, s.flow.w_t);
    flow::validate_rho(g, s.flow.rho);
    auto [k_min, solution] = flow::minimal_robots(g, s.flow.rho, s.flow.k_max);
    auto verification = flow::verify_solution(g, solution, s.flow.rho);

    rec.status = verification.ok ? "ok" : "verification-failed";
    rec.k_min = k_min;
    rec.flow_objective = solution.objective;
    rec.security_ok = verification.ok;
    if (verification.ok) {
      rec.security_checks.push_back("pass: independent flow verification clean");
    } else {
      for (const auto& v : verification.violations) rec.security_checks.push_back("FAIL: " + v);
    }
    out.log.push_back("K_min = " + std::to_string(k_min) + ", objective = " +
                      fmt(solution.objective));

    out.artifacts.graph = std::move(g);
    out.artifacts.solution = std::move(solution);
    out.artifacts.verification = std::move(verification);
    out.artifacts.k_min = k_min;
    if (!rec.security_ok) out.exit_code = kExitSecurityFailed;
  } catch (const NoSecurePartition& e) {
    rec.status = "no-secure-partition";
    rec.notes.push_back(e.what());
    out.log.push_back(std::string("ctco: ") + e.what());
    out.exit_code = kExitInfeasible;
  } catch (const RhoTooLarge& e) {
    rec.status = "validation-error";
    rec.notes.push_back(std::string(e.what()) + " (admissible bound " + fmt(e.bound) + ")");
    out.log.push_back(std::string("ctco: ") + e.what());
    out.exit_code = kExitValidation;
  } catch (const WeightOrderViolation& e) {
    rec.status = "validation-error";
    rec.notes.push_back(e.what());
    out.log.push_back(std::string("ctco: ") + e.what());
    out.exit_code = kExitValidation;
  } catch (const FlowInfeasible& e) {
    rec.status = "infeasible";
    rec.notes.push_back(e.what());
    out.log.push_back(std::string("ctco: ") + e.what());
    out.exit_code = kExitInfeasible;
  } catch (const ValidationError& e) {
    rec.status = "validation-error";
    rec.notes.push_back(e.what());
    out.log.push_back(std::string("ctco: ") + e.what());
    out.exit_code = kExitValidation;
  }
  return out;
}

}  // namespace coplan::pipeline
