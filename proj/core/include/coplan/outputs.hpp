#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coplan/checkpoint_graph.hpp"
#include "coplan/flow.hpp"
#include "coplan/scenario.hpp"
#include "coplan/types.hpp"

namespace coplan::io {

// FNV-1a 64-bit digest of raw bytes; identifies the input in reports.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

// --- trajectories.csv -------------------------------------------------------
// Header "robot,t,x,y[,z]", one row per robot-step, coordinates printed with
// 9 significant digits. Writing is canonical: writing what was just read
// reproduces the same bytes, and reading what was just written reproduces
// the same doubles.
std::string trajectories_to_csv(const Trajectories& q);
Trajectories trajectories_from_csv(const std::string& text);

// --- graph.json --------------------------------------------------------------
// Vertices (id, subteam, time, position, kind), edges (from, to, kind,
// weight, polyline), security indices, source, sink. Doubles use shortest
// round-trip formatting, so graph_from_json(graph_to_json(g)) == g exactly.
std::string graph_to_json(const graph::FlowGraph& g);
graph::FlowGraph graph_from_json(const std::string& text);

// --- flows.json --------------------------------------------------------------
// Per-flow ordered vertex ids (source to sink) plus edge indices, the
// objective, K_min, and the independent verification report.
std::string flows_to_json(const graph::FlowGraph& g, const flow::FlowSolution& solution,
                          int k_min, const flow::VerifyReport& verification);
// Reconstructs the solution (K, per-flow edge lists, objective, empty flows)
// and, when requested, K_min.
flow::FlowSolution flows_from_json(const std::string& text, int* k_min = nullptr);

// --- report.json --------------------------------------------------------------
// Everything needed to reproduce a run byte-identically: stage name, input
// hash, seeds, the full resolved parameter set, and deterministic solve
// diagnostics. Wall-clock timings are deliberately excluded (they go to the
// caller's log instead) so reruns stay byte-stable.
struct RunRecord {
  std::string stage;
  std::string input_hash;
  int admm_seed = 1;
  int rrt_seed = 1;
  std::string scenario_json;  // canonical form of the resolved scenario
  std::vector<std::string> warnings;

  std::string status = "ok";  // ok | diverged | validation-error | ...
  int iterations = 0;
  int residual_dim = 0;  // stacked residual size; the convergence thresholds
                         // are eps_pri/eps_dual times its square root
  std::vector<double> primal_history;
  std::vector<double> dual_history;
  std::vector<std::pair<std::string, double>> block_violations;  // label, value

  std::vector<std::string> security_checks;  // "pass: ..." / "FAIL: ..."
  bool security_ok = true;

  int k_min = -1;           // ctco only; -1 = not applicable
  double flow_objective = 0;
  std::vector<std::string> notes;
};

std::string report_to_json(const RunRecord& record);

// --- write_outputs -------------------------------------------------------------
// Everything a stage produced. Optional members are skipped (their files are
// still written, holding empty structures, so consumers see a fixed file set).
struct RunArtifacts {
  const scenario::Scenario* scen = nullptr;  // drives the plot; may be null
  std::optional<Trajectories> trajectories;
  std::optional<graph::FlowGraph> graph;
  std::optional<flow::FlowSolution> solution;
  std::optional<flow::VerifyReport> verification;
  int k_min = -1;
  bool draw_envelopes = false;  // outline reachability envelopes in the plot
  RunRecord record;
};

// Writes trajectories.csv, graph.json, flows.json, report.json, and plot.svg
// into out_dir (created if missing). Returns the paths written. Byte-stable
// across reruns with identical artifacts. Throws IoError when a file cannot
// be created.
std::vector<std::string> write_outputs(const RunArtifacts& artifacts, const std::string& out_dir);

// Small helpers shared by the tools.
std::string read_text_file(const std::string& path);   // throws IoError
void write_text_file(const std::string& path, const std::string& content);  // throws IoError

}  // namespace coplan::io
