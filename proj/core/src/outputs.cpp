#include "coplan/outputs.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coplan/render.hpp"

namespace coplan::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

ordered_json position_json(const Vec3& p) { return ordered_json::array({p.x(), p.y(), p.z()}); }

Vec3 position_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw ParseError(field + ": expected [x, y, z]");
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ParseError(field + ": expected numbers");
    p[i] = j[i].get<double>();
  }
  return p;
}

graph::VertexKind vertex_kind_from_string(const std::string& s, const std::string& field) {
  using graph::VertexKind;
  for (VertexKind k : {VertexKind::start, VertexKind::end, VertexKind::security,
                       VertexKind::arrival, VertexKind::departure, VertexKind::source,
                       VertexKind::sink}) {
    if (s == graph::to_string(k)) return k;
  }
  throw ParseError(field + ": unknown vertex kind \"" + s + "\"");
}

graph::EdgeKind edge_kind_from_string(const std::string& s, const std::string& field) {
  using graph::EdgeKind;
  for (EdgeKind k : {EdgeKind::in_trajectory, EdgeKind::cross, EdgeKind::virtual_edge}) {
    if (s == graph::to_string(k)) return k;
  }
  throw ParseError(field + ": unknown edge kind \"" + s + "\"");
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, value);
  return buf;
}

std::string trajectories_to_csv(const Trajectories& q) {
  std::string out = q.dim() == 3 ? "robot,t,x,y,z\n" : "robot,t,x,y\n";
  for (int r = 0; r < q.robots(); ++r) {
    for (int t = 0; t <= q.horizon(); ++t) {
      out += std::to_string(r);
      out += ',';
      out += std::to_string(t);
      auto row = q.at(r, t);
      for (int i = 0; i < q.dim(); ++i) {
        out += ',';
        out += format_sig9(row[i]);
      }
      out += '\n';
    }
  }
  return out;
}

Trajectories trajectories_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trajectories: empty file");
  int dim;
  if (line == "robot,t,x,y") {
    dim = 2;
  } else if (line == "robot,t,x,y,z") {
    dim = 3;
  } else {
    throw ParseError("trajectories: unrecognized header \"" + line + "\"");
  }

  struct Row {
    int robot, t;
    Vec3 p;
  };
  std::vector<Row> rows;
  int max_robot = -1, max_t = -1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    Row row{0, 0, Vec3::Zero()};
    auto next = [&](const char* what) {
      if (!std::getline(cells, cell, ','))
        throw ParseError("trajectories line " + std::to_string(line_no) + ": missing " + what);
      return cell;
    };
    try {
      row.robot = std::stoi(next("robot"));
      row.t = std::stoi(next("t"));
      for (int i = 0; i < dim; ++i) row.p[i] = std::stod(next("coordinate"));
    } catch (const std::logic_error&) {
      throw ParseError("trajectories line " + std::to_string(line_no) + ": malformed number");
    }
    if (std::getline(cells, cell, ','))
      throw ParseError("trajectories line " + std::to_string(line_no) + ": extra columns");
    if (row.robot < 0 || row.t < 0)
      throw ParseError("trajectories line " + std::to_string(line_no) + ": negative index");
    max_robot = std::max(max_robot, row.robot);
    max_t = std::max(max_t, row.t);
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError("trajectories: no data rows");
  if (max_t < 1) throw ParseError("trajectories: horizon must be at least 1");

  int robots = max_robot + 1, horizon = max_t;
  if (static_cast<int>(rows.size()) != robots * (horizon + 1))
    throw ParseError("trajectories: expected " + std::to_string(robots * (horizon + 1)) +
                     " rows for " + std::to_string(robots) + " robot(s) with T=" +
                     std::to_string(horizon) + ", found " + std::to_string(rows.size()));
  Trajectories q(robots, horizon, dim);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& row : rows) {
    size_t slot = static_cast<size_t>(row.robot) * (horizon + 1) + row.t;
    if (seen[slot])
      throw ParseError("trajectories: duplicate row for robot " + std::to_string(row.robot) +
                       " t=" + std::to_string(row.t));
    seen[slot] = true;
    q.set(row.robot, row.t, row.p.head(dim));
  }
  return q;
}

std::string graph_to_json(const graph::FlowGraph& g) {
  ordered_json j;
  j["vertices"] = ordered_json::array();
  for (const auto& v : g.vertices) {
    ordered_json e;
    e["id"] = v.id;
    e["subteam"] = v.subteam;
    e["time"] = v.time;
    e["position"] = position_json(v.position);
    e["kind"] = graph::to_string(v.kind);
    j["vertices"].push_back(e);
  }
  j["edges"] = ordered_json::array();
  for (const auto& e : g.edges) {
    ordered_json o;
    o["from"] = e.from;
    o["to"] = e.to;
    o["kind"] = graph::to_string(e.kind);
    o["weight"] = e.weight;
    o["polyline"] = ordered_json::array();
    for (const auto& p : e.polyline) o["polyline"].push_back(position_json(p));
    j["edges"].push_back(o);
  }
  j["security"] = g.security;
  j["source"] = g.source;
  j["sink"] = g.sink;
  return j.dump(2) + "\n";
}

graph::FlowGraph graph_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("graph: ") + e.what());
  }
  graph::FlowGraph g;
  if (!j.is_object() || !j.contains("vertices") || !j.contains("edges"))
    throw ParseError("graph: expected an object with vertices and edges");
  for (size_t i = 0; i < j["vertices"].size(); ++i) {
    const json& v = j["vertices"][i];
    const std::string field = "graph.vertices[" + std::to_string(i) + "]";
    graph::FlowVertex out;
    out.id = v.at("id").get<std::string>();
    out.subteam = v.at("subteam").get<int>();
    out.time = v.at("time").get<int>();
    out.position = position_from_json(v.at("position"), field + ".position");
    out.kind = vertex_kind_from_string(v.at("kind").get<std::string>(), field + ".kind");
    g.vertices.push_back(out);
  }
  int n = static_cast<int>(g.vertices.size());
  for (size_t i = 0; i < j["edges"].size(); ++i) {
    const json& e = j["edges"][i];
    const std::string field = "graph.edges[" + std::to_string(i) + "]";
    graph::FlowEdge out;
    out.from = e.at("from").get<int>();
    out.to = e.at("to").get<int>();
    if (out.from < 0 || out.from >= n || out.to < 0 || out.to >= n)
      throw ParseError(field + ": vertex index out of range");
    out.kind = edge_kind_from_string(e.at("kind").get<std::string>(), field + ".kind");
    out.weight = e.at("weight").get<double>();
    if (e.contains("polyline")) {
      for (size_t p = 0; p < e["polyline"].size(); ++p)
        out.polyline.push_back(position_from_json(
            e["polyline"][p], field + ".polyline[" + std::to_string(p) + "]"));
    }
    g.edges.push_back(out);
  }
  if (j.contains("security")) {
    for (const auto& s : j["security"]) {
      int idx = s.get<int>();
      if (idx < 0 || idx >= n) throw ParseError("graph.security: vertex index out of range");
      g.security.push_back(idx);
    }
  }
  g.source = j.value("source", -1);
  g.sink = j.value("sink", -1);
  if (g.source < -1 || g.source >= n || g.sink < -1 || g.sink >= n)
    throw ParseError("graph: source/sink index out of range");
  return g;
}

std::string flows_to_json(const graph::FlowGraph& g, const flow::FlowSolution& solution,
                          int k_min, const flow::VerifyReport& verification) {
  ordered_json j;
  j["K"] = solution.K;
  j["K_min"] = k_min;
  j["objective"] = solution.objective;
  j["flows"] = ordered_json::array();
  for (const auto& path : solution.flows) {
    ordered_json f;
    f["edges"] = path;
    f["vertices"] = ordered_json::array();
    for (size_t i = 0; i < path.size(); ++i) {
      const auto& e = g.edges.at(path[i]);
      if (i == 0) f["vertices"].push_back(g.vertices.at(e.from).id);
      f["vertices"].push_back(g.vertices.at(e.to).id);
    }
    j["flows"].push_back(f);
  }
  j["empty_flows"] = solution.empty_flows;
  j["verification"] = {{"ok", verification.ok},
                       {"violations", verification.violations},
                       {"recomputed_objective", verification.recomputed_objective}};
  return j.dump(2) + "\n";
}

flow::FlowSolution flows_from_json(const std::string& text, int* k_min) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("flows: ") + e.what());
  }
  flow::FlowSolution s;
  s.K = j.value("K", 0);
  s.objective = j.value("objective", 0.0);
  if (j.contains("flows")) {
    for (const auto& f : j["flows"]) {
      std::vector<int> edges;
      if (f.contains("edges")) {
        for (const auto& e : f["edges"]) edges.push_back(e.get<int>());
      }
      s.flows.push_back(std::move(edges));
    }
  }
  if (j.contains("empty_flows")) {
    for (const auto& e : j["empty_flows"]) s.empty_flows.push_back(e.get<int>());
  }
  if (k_min) *k_min = j.value("K_min", -1);
  return s;
}

std::string report_to_json(const RunRecord& r) {
  ordered_json j;
  j["stage"] = r.stage;
  j["input_hash"] = r.input_hash;
  j["seeds"] = {{"admm", r.admm_seed}, {"rrt", r.rrt_seed}};
  if (!r.scenario_json.empty()) j["scenario"] = json::parse(r.scenario_json);
  j["warnings"] = r.warnings;
  j["status"] = r.status;
  j["iterations"] = r.iterations;
  j["residual_dim"] = r.residual_dim;
  j["primal_history"] = r.primal_history;
  j["dual_history"] = r.dual_history;
  j["block_violations"] = ordered_json::array();
  for (const auto& [label, value] : r.block_violations)
    j["block_violations"].push_back({{"label", label}, {"violation", value}});
  j["security"] = {{"ok", r.security_ok}, {"checks", r.security_checks}};
  if (r.k_min >= 0) j["flow"] = {{"K_min", r.k_min}, {"objective", r.flow_objective}};
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> write_outputs(const RunArtifacts& a, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  auto path_of = [&out_dir](const char* name) { return (fs::path(out_dir) / name).string(); };
  std::vector<std::string> written;

  std::string csv = a.trajectories ? trajectories_to_csv(*a.trajectories)
                                   : std::string("robot,t,x,y\n");
  write_text_file(path_of("trajectories.csv"), csv);
  written.push_back(path_of("trajectories.csv"));

  graph::FlowGraph empty_graph;
  const graph::FlowGraph& g = a.graph ? *a.graph : empty_graph;
  write_text_file(path_of("graph.json"), graph_to_json(g));
  written.push_back(path_of("graph.json"));

  flow::FlowSolution empty_solution;
  flow::VerifyReport empty_report;
  write_text_file(path_of("flows.json"),
                  flows_to_json(g, a.solution ? *a.solution : empty_solution, a.k_min,
                                a.verification ? *a.verification : empty_report));
  written.push_back(path_of("flows.json"));

  write_text_file(path_of("report.json"), report_to_json(a.record));
  written.push_back(path_of("report.json"));

  render::RenderInput rin;
  rin.scen = a.scen;
  rin.trajectories = a.trajectories ? &*a.trajectories : nullptr;
  rin.graph = a.graph ? &*a.graph : nullptr;
  rin.solution = a.solution ? &*a.solution : nullptr;
  rin.draw_envelopes = a.draw_envelopes;
  write_text_file(path_of("plot.svg"), render::render_svg(rin));
  written.push_back(path_of("plot.svg"));

  return written;
}

}  // namespace coplan::io
