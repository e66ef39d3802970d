#pragma once

#include <string>
#include <vector>

#include "coplan/admm.hpp"
#include "coplan/constraints.hpp"
#include "coplan/geometry.hpp"
#include "coplan/rrt.hpp"
#include "coplan/types.hpp"

namespace coplan::scenario {

// Coverage-objective grid laid over the workspace.
struct GridParams {
  int nx = 8;
  int ny = 8;
  double initial_covariance = 1.0;
  double process_noise = 0.01;
  double sigma_meas = 1.0;
  double ell = 1.0;
};

// Scheduling-graph weights and the flow-count search cap.
struct FlowParams {
  double w_c = 10.0;
  double w_t = 1.0;
  double rho = 0.01;
  int k_max = 8;
};

struct RobotSpec {
  Vec3 start = Vec3::Zero();
  Vec3 goal = Vec3::Zero();
};

// A fully validated problem instance. All parameter groups carry their
// documented defaults when the source file omits them; the loader records
// softly repaired input (missing v_max, clockwise polygons, unknown keys)
// in `warnings` instead of failing.
struct Scenario {
  int dimension = 2;
  Vec3 workspace_min = Vec3::Zero();
  Vec3 workspace_max = Vec3::Zero();
  int horizon = 20;  // steps; waypoints run 0..horizon
  double v_max = 0.5;

  std::vector<RobotSpec> robots;
  std::vector<geometry::ConvexPolygon> obstacles;   // avoid
  std::vector<geometry::ConvexPolygon> forbidden;   // must stay unreachable
  std::vector<constraints::CoObservationEvent> co_observations;

  GridParams grid;
  admm::AdmmParams admm;
  int admm_seed = 1;
  rrt::TreeParams rrt;
  FlowParams flow;

  std::vector<std::string> warnings;
};

// Parses and validates JSON text. `origin` names the source in error
// messages. Throws ParseError on malformed JSON, ValidationError (naming the
// offending field) on schema or semantic violations.
Scenario parse_scenario(const std::string& text, const std::string& origin = "scenario");

// parse_scenario over the contents of `path`.
Scenario load_scenario(const std::string& path);

// Canonical serialization; parse_scenario(scenario_to_json(s)) reproduces
// every field exactly (doubles use shortest round-trip formatting).
std::string scenario_to_json(const Scenario& s);

}  // namespace coplan::scenario
