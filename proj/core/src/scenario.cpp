#include "coplan/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace coplan::scenario {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field, "expected a number");
  return j.get<double>();
}

int get_integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ValidationError(field, "expected an integer");
  return j.get<int>();
}

Vec3 get_point(const json& j, const std::string& field, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ValidationError(field, "expected an array of " + std::to_string(dim) + " numbers");
  Vec3 p = Vec3::Zero();
  for (int i = 0; i < dim; ++i) p[i] = get_number(j[i], field + "[" + std::to_string(i) + "]");
  return p;
}

void warn_unknown_keys(const json& j, const std::set<std::string>& known,
                       const std::string& scope, std::vector<std::string>& warnings) {
  for (const auto& item : j.items()) {
    if (!known.count(item.key()))
      warnings.push_back(scope.empty() ? "unknown key \"" + item.key() + "\" ignored"
                                       : scope + ": unknown key \"" + item.key() + "\" ignored");
  }
}

// Vertices arrive as [x, y] pairs (planar regions; in 3-D they act as
// infinite vertical prisms). Clockwise input is reversed with a warning.
geometry::ConvexPolygon get_polygon(const json& j, const std::string& field,
                                    std::vector<std::string>& warnings) {
  if (!j.is_array() || j.size() < 3)
    throw ValidationError(field, "expected an array of at least 3 vertices");
  std::vector<Vec3> vertices;
  for (size_t i = 0; i < j.size(); ++i)
    vertices.push_back(get_point(j[i], field + "[" + std::to_string(i) + "]", 2));
  double area2 = 0.0;
  int n = static_cast<int>(vertices.size());
  for (int i = 0; i < n; ++i) {
    const Vec3& a = vertices[i];
    const Vec3& b = vertices[(i + 1) % n];
    area2 += a.x() * b.y() - a.y() * b.x();
  }
  if (area2 < 0.0) {
    std::reverse(vertices.begin(), vertices.end());
    warnings.push_back(field + ": clockwise vertex order reversed");
  }
  try {
    return geometry::ConvexPolygon(std::move(vertices));
  } catch (const ValidationError& e) {
    throw ValidationError(field, e.reason);
  }
}

bool inside_workspace(const Vec3& p, const Scenario& s) {
  for (int i = 0; i < s.dimension; ++i) {
    if (p[i] < s.workspace_min[i] || p[i] > s.workspace_max[i]) return false;
  }
  return true;
}

void check_endpoint(const Vec3& p, const std::string& field, const Scenario& s) {
  if (!inside_workspace(p, s)) throw ValidationError(field, "outside the workspace");
  for (size_t i = 0; i < s.obstacles.size(); ++i) {
    if (s.obstacles[i].contains(p))
      throw ValidationError(field, "inside obstacles[" + std::to_string(i) + "]");
  }
  for (size_t i = 0; i < s.forbidden.size(); ++i) {
    if (s.forbidden[i].contains(p))
      throw ValidationError(field, "inside forbidden[" + std::to_string(i) + "]");
  }
}

ordered_json array_of(const Vec3& p, int dim) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[i]);
  return a;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError(origin, "top level must be a JSON object");

  Scenario s;
  warn_unknown_keys(j,
                    {"dimension", "workspace", "T", "v_max", "robots", "obstacles", "forbidden",
                     "co_observations", "grid", "admm", "rrt", "flow"},
                    "", s.warnings);

  if (!j.contains("dimension")) throw ValidationError("dimension", "missing required field");
  s.dimension = get_integer(j["dimension"], "dimension");
  if (s.dimension != 2 && s.dimension != 3)
    throw ValidationError("dimension", "must be 2 or 3");

  if (!j.contains("workspace")) throw ValidationError("workspace", "missing required field");
  const json& ws = j["workspace"];
  if (!ws.is_object()) throw ValidationError("workspace", "expected an object with min and max");
  warn_unknown_keys(ws, {"min", "max"}, "workspace", s.warnings);
  if (!ws.contains("min")) throw ValidationError("workspace.min", "missing required field");
  if (!ws.contains("max")) throw ValidationError("workspace.max", "missing required field");
  s.workspace_min = get_point(ws["min"], "workspace.min", s.dimension);
  s.workspace_max = get_point(ws["max"], "workspace.max", s.dimension);
  for (int i = 0; i < s.dimension; ++i) {
    if (!(s.workspace_min[i] < s.workspace_max[i]))
      throw ValidationError("workspace", "min must be strictly below max in every coordinate");
  }

  if (!j.contains("T")) throw ValidationError("T", "missing required field");
  s.horizon = get_integer(j["T"], "T");
  if (s.horizon < 2) throw ValidationError("T", "horizon must be at least 2");

  if (j.contains("v_max")) {
    s.v_max = get_number(j["v_max"], "v_max");
    if (!(s.v_max > 0)) throw ValidationError("v_max", "must be positive");
  } else {
    s.v_max = 0.5;
    s.warnings.push_back("v_max missing; default 0.5 applied");
  }

  if (j.contains("obstacles")) {
    const json& arr = j["obstacles"];
    if (!arr.is_array()) throw ValidationError("obstacles", "expected an array of polygons");
    for (size_t i = 0; i < arr.size(); ++i)
      s.obstacles.push_back(get_polygon(arr[i], "obstacles[" + std::to_string(i) + "]", s.warnings));
  }
  if (j.contains("forbidden")) {
    const json& arr = j["forbidden"];
    if (!arr.is_array()) throw ValidationError("forbidden", "expected an array of polygons");
    for (size_t i = 0; i < arr.size(); ++i)
      s.forbidden.push_back(get_polygon(arr[i], "forbidden[" + std::to_string(i) + "]", s.warnings));
  }

  if (!j.contains("robots")) throw ValidationError("robots", "missing required field");
  const json& robots = j["robots"];
  if (!robots.is_array() || robots.empty())
    throw ValidationError("robots", "expected a non-empty array");
  for (size_t i = 0; i < robots.size(); ++i) {
    const std::string field = "robots[" + std::to_string(i) + "]";
    const json& r = robots[i];
    if (!r.is_object()) throw ValidationError(field, "expected an object with start and goal");
    warn_unknown_keys(r, {"start", "goal"}, field, s.warnings);
    if (!r.contains("start")) throw ValidationError(field + ".start", "missing required field");
    if (!r.contains("goal")) throw ValidationError(field + ".goal", "missing required field");
    RobotSpec spec;
    spec.start = get_point(r["start"], field + ".start", s.dimension);
    spec.goal = get_point(r["goal"], field + ".goal", s.dimension);
    check_endpoint(spec.start, field + ".start", s);
    check_endpoint(spec.goal, field + ".goal", s);
    s.robots.push_back(spec);
  }

  if (j.contains("co_observations")) {
    const json& arr = j["co_observations"];
    if (!arr.is_array()) throw ValidationError("co_observations", "expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string field = "co_observations[" + std::to_string(i) + "]";
      const json& e = arr[i];
      if (!e.is_object()) throw ValidationError(field, "expected an object");
      warn_unknown_keys(e, {"a", "b", "t", "d_max"}, field, s.warnings);
      for (const char* key : {"a", "b", "t", "d_max"}) {
        if (!e.contains(key))
          throw ValidationError(field + "." + key, "missing required field");
      }
      constraints::CoObservationEvent ev;
      ev.robot_a = get_integer(e["a"], field + ".a");
      ev.robot_b = get_integer(e["b"], field + ".b");
      ev.time = get_integer(e["t"], field + ".t");
      ev.d_max = get_number(e["d_max"], field + ".d_max");
      int n_robots = static_cast<int>(s.robots.size());
      if (ev.robot_a < 0 || ev.robot_a >= n_robots)
        throw ValidationError(field + ".a", "robot index out of range");
      if (ev.robot_b < 0 || ev.robot_b >= n_robots)
        throw ValidationError(field + ".b", "robot index out of range");
      if (ev.robot_a == ev.robot_b)
        throw ValidationError(field, "a and b must name different robots");
      if (ev.time < 0 || ev.time > s.horizon)
        throw ValidationError(field + ".t", "time outside 0..T");
      if (!(ev.d_max > 0)) throw ValidationError(field + ".d_max", "must be positive");
      s.co_observations.push_back(ev);
    }
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (!g.is_object()) throw ValidationError("grid", "expected an object");
    warn_unknown_keys(g, {"nx", "ny", "initial_covariance", "process_noise", "sigma_meas", "ell"},
                      "grid", s.warnings);
    if (g.contains("nx")) s.grid.nx = get_integer(g["nx"], "grid.nx");
    if (g.contains("ny")) s.grid.ny = get_integer(g["ny"], "grid.ny");
    if (g.contains("initial_covariance"))
      s.grid.initial_covariance = get_number(g["initial_covariance"], "grid.initial_covariance");
    if (g.contains("process_noise"))
      s.grid.process_noise = get_number(g["process_noise"], "grid.process_noise");
    if (g.contains("sigma_meas")) s.grid.sigma_meas = get_number(g["sigma_meas"], "grid.sigma_meas");
    if (g.contains("ell")) s.grid.ell = get_number(g["ell"], "grid.ell");
    if (s.grid.nx < 1 || s.grid.ny < 1)
      throw ValidationError("grid", "nx and ny must be at least 1");
    if (!(s.grid.initial_covariance > 0))
      throw ValidationError("grid.initial_covariance", "must be positive");
    if (s.grid.process_noise < 0) throw ValidationError("grid.process_noise", "must be >= 0");
    if (!(s.grid.sigma_meas > 0)) throw ValidationError("grid.sigma_meas", "must be positive");
    if (!(s.grid.ell > 0)) throw ValidationError("grid.ell", "must be positive");
  }

  if (j.contains("admm")) {
    const json& a = j["admm"];
    if (!a.is_object()) throw ValidationError("admm", "expected an object");
    warn_unknown_keys(a, {"rho", "eps_pri", "eps_dual", "max_iter", "inner_budget", "seed"},
                      "admm", s.warnings);
    if (a.contains("rho")) s.admm.rho = get_number(a["rho"], "admm.rho");
    if (a.contains("eps_pri")) s.admm.eps_pri = get_number(a["eps_pri"], "admm.eps_pri");
    if (a.contains("eps_dual")) s.admm.eps_dual = get_number(a["eps_dual"], "admm.eps_dual");
    if (a.contains("max_iter")) s.admm.max_iter = get_integer(a["max_iter"], "admm.max_iter");
    if (a.contains("inner_budget"))
      s.admm.inner_budget = get_integer(a["inner_budget"], "admm.inner_budget");
    if (a.contains("seed")) s.admm_seed = get_integer(a["seed"], "admm.seed");
    if (!(s.admm.rho > 0)) throw ValidationError("admm.rho", "must be positive");
    if (!(s.admm.eps_pri > 0)) throw ValidationError("admm.eps_pri", "must be positive");
    if (!(s.admm.eps_dual > 0)) throw ValidationError("admm.eps_dual", "must be positive");
    if (s.admm.max_iter < 1) throw ValidationError("admm.max_iter", "must be at least 1");
    if (s.admm.inner_budget < 1) throw ValidationError("admm.inner_budget", "must be at least 1");
  }

  if (j.contains("rrt")) {
    const json& r = j["rrt"];
    if (!r.is_object()) throw ValidationError("rrt", "expected an object");
    warn_unknown_keys(r, {"step", "gamma", "max_iter", "goal_tol", "seed"}, "rrt", s.warnings);
    if (r.contains("step")) s.rrt.step = get_number(r["step"], "rrt.step");
    if (r.contains("gamma")) s.rrt.gamma = get_number(r["gamma"], "rrt.gamma");
    if (r.contains("max_iter")) s.rrt.max_iter = get_integer(r["max_iter"], "rrt.max_iter");
    if (r.contains("goal_tol")) s.rrt.goal_tolerance = get_number(r["goal_tol"], "rrt.goal_tol");
    if (r.contains("seed")) s.rrt.seed = get_integer(r["seed"], "rrt.seed");
    if (!(s.rrt.step > 0)) throw ValidationError("rrt.step", "must be positive");
    if (!(s.rrt.gamma > 0)) throw ValidationError("rrt.gamma", "must be positive");
    if (s.rrt.max_iter < 0) throw ValidationError("rrt.max_iter", "must be >= 0");
    if (s.rrt.goal_tolerance < 0) throw ValidationError("rrt.goal_tol", "must be >= 0");
  }

  if (j.contains("flow")) {
    const json& f = j["flow"];
    if (!f.is_object()) throw ValidationError("flow", "expected an object");
    warn_unknown_keys(f, {"w_c", "w_t", "rho", "K_max"}, "flow", s.warnings);
    if (f.contains("w_c")) s.flow.w_c = get_number(f["w_c"], "flow.w_c");
    if (f.contains("w_t")) s.flow.w_t = get_number(f["w_t"], "flow.w_t");
    if (f.contains("rho")) s.flow.rho = get_number(f["rho"], "flow.rho");
    if (f.contains("K_max")) s.flow.k_max = get_integer(f["K_max"], "flow.K_max");
    if (!(s.flow.w_c > 0)) throw ValidationError("flow.w_c", "must be positive");
    if (!(s.flow.w_t > 0)) throw ValidationError("flow.w_t", "must be positive");
    if (!(s.flow.rho > 0)) throw ValidationError("flow.rho", "must be positive");
    if (s.flow.k_max < 1) throw ValidationError("flow.K_max", "must be at least 1");
  }

  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path);
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["dimension"] = s.dimension;
  j["workspace"]["min"] = array_of(s.workspace_min, s.dimension);
  j["workspace"]["max"] = array_of(s.workspace_max, s.dimension);
  j["T"] = s.horizon;
  j["v_max"] = s.v_max;
  j["robots"] = ordered_json::array();
  for (const auto& r : s.robots) {
    ordered_json e;
    e["start"] = array_of(r.start, s.dimension);
    e["goal"] = array_of(r.goal, s.dimension);
    j["robots"].push_back(e);
  }
  auto polygons = [](const std::vector<geometry::ConvexPolygon>& list) {
    ordered_json arr = ordered_json::array();
    for (const auto& poly : list) {
      ordered_json p = ordered_json::array();
      for (const auto& v : poly.vertices()) p.push_back(array_of(v, 2));
      arr.push_back(p);
    }
    return arr;
  };
  j["obstacles"] = polygons(s.obstacles);
  j["forbidden"] = polygons(s.forbidden);
  j["co_observations"] = ordered_json::array();
  for (const auto& e : s.co_observations)
    j["co_observations"].push_back(
        {{"a", e.robot_a}, {"b", e.robot_b}, {"t", e.time}, {"d_max", e.d_max}});
  j["grid"] = {{"nx", s.grid.nx},
               {"ny", s.grid.ny},
               {"initial_covariance", s.grid.initial_covariance},
               {"process_noise", s.grid.process_noise},
               {"sigma_meas", s.grid.sigma_meas},
               {"ell", s.grid.ell}};
  j["admm"] = {{"rho", s.admm.rho},
               {"eps_pri", s.admm.eps_pri},
               {"eps_dual", s.admm.eps_dual},
               {"max_iter", s.admm.max_iter},
               {"inner_budget", s.admm.inner_budget},
               {"seed", s.admm_seed}};
  j["rrt"] = {{"step", s.rrt.step},
              {"gamma", s.rrt.gamma},
              {"max_iter", s.rrt.max_iter},
              {"goal_tol", s.rrt.goal_tolerance},
              {"seed", s.rrt.seed}};
  j["flow"] = {{"w_c", s.flow.w_c},
               {"w_t", s.flow.w_t},
               {"rho", s.flow.rho},
               {"K_max", s.flow.k_max}};
  return j.dump(2) + "\n";
}

}  // namespace coplan::scenario
