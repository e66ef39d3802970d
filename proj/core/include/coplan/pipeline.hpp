#pragma once

#include <string>
#include <vector>

#include "coplan/outputs.hpp"
#include "coplan/scenario.hpp"
#include "coplan/types.hpp"

namespace coplan::pipeline {

// Process exit codes shared by every stage.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;           // unexpected/internal
inline constexpr int kExitValidation = 2;      // bad input or parameters
inline constexpr int kExitDiverged = 3;        // optimizer hit max_iter
inline constexpr int kExitSecurityFailed = 4;  // independent re-check failed
inline constexpr int kExitInfeasible = 5;      // no secure partition / no flow cover

struct StageOutcome {
  int exit_code = kExitOk;
  io::RunArtifacts artifacts;     // borrows the scenario passed to the stage
  std::vector<std::string> log;   // human-readable progress lines
};

// Unsecured trajectory optimization: coverage objective with velocity,
// workspace, and region-avoidance blocks. `input_bytes` is hashed into the
// report. The scenario must outlive the returned artifacts.
StageOutcome run_plan(const scenario::Scenario& s, const std::string& input_bytes);

// run_plan plus scheduled-proximity blocks (one per co-observation event)
// and reachability blocks (one per robot per consecutive meeting pair per
// forbidden region). After the solve, every security requirement is
// re-checked independently of the optimizer's own bookkeeping; the exit
// code is 0 only when the full re-check passes.
StageOutcome run_secure(const scenario::Scenario& s, const std::string& input_bytes);

// Cross-trajectory scheduling on fixed trajectories: secure-span checkpoint
// partitioning, routed cross-edge discovery, scheduling-graph assembly,
// weight-budget validation, minimal flow-count search, and independent
// solution verification.
StageOutcome run_ctco(const scenario::Scenario& s, const Trajectories& trajectories,
                      const std::string& input_bytes);

}  // namespace coplan::pipeline
