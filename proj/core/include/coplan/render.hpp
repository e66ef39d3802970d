#pragma once

#include <string>

#include "coplan/checkpoint_graph.hpp"
#include "coplan/flow.hpp"
#include "coplan/scenario.hpp"
#include "coplan/types.hpp"

namespace coplan::render {

// Inputs are borrowed, never owned; null members are simply not drawn.
struct RenderInput {
  const scenario::Scenario* scen = nullptr;        // workspace frame + regions
  const Trajectories* trajectories = nullptr;      // per-robot polylines
  const graph::FlowGraph* graph = nullptr;         // checkpoint markers
  const flow::FlowSolution* solution = nullptr;    // dashed cross paths per flow
  bool draw_envelopes = false;  // reachability outlines between scheduled meetings
};

// Deterministic static SVG: workspace frame, obstacles in grey, forbidden
// regions in red, per-robot trajectories with waypoint dots, co-observation
// markers, optional reachability ellipse outlines, and dashed cross-path
// overlays colored per flow. 3-D scenes are drawn as their xy projection.
std::string render_svg(const RenderInput& in);

}  // namespace coplan::render
