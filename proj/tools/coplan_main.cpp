// Command-line front end: plan / secure / ctco / render subcommands over a
// shared scenario format. Exit codes: 0 success, 1 internal error,
// 2 validation, 3 divergence, 4 security verification failed, 5 infeasible.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <coplan/outputs.hpp>
#include <coplan/pipeline.hpp>
#include <coplan/render.hpp>
#include <coplan/scenario.hpp>

namespace {

using namespace coplan;

struct Options {
  std::string scenario_path;
  std::string out_dir;
  std::string trajectories_path;  // ctco: external CSV input
  std::string artifacts_dir;      // render: where to read prior outputs
  int seed = 0;
  bool seed_set = false;
  int k_max = 0;
  bool k_max_set = false;
  bool verbose = false;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void print_log(const pipeline::StageOutcome& outcome, const Options& opt) {
  for (const auto& line : outcome.log) std::cout << line << "\n";
  if (opt.verbose) {
    for (const auto& check : outcome.artifacts.record.security_checks)
      std::cerr << "  " << check << "\n";
    for (const auto& note : outcome.artifacts.record.notes) std::cerr << "  note: " << note << "\n";
  }
}

scenario::Scenario load_with_overrides(const Options& opt, std::string& bytes) {
  bytes = io::read_text_file(opt.scenario_path);
  auto s = scenario::parse_scenario(bytes, opt.scenario_path);
  if (opt.seed_set) {
    s.admm_seed = opt.seed;
    s.rrt.seed = opt.seed;
  }
  if (opt.k_max_set) s.flow.k_max = opt.k_max;
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << "\n";
  return s;
}

int finish(const pipeline::StageOutcome& outcome, const Options& opt,
           std::chrono::steady_clock::time_point start) {
  auto written = io::write_outputs(outcome.artifacts, opt.out_dir);
  print_log(outcome, opt);
  if (opt.verbose) {
    for (const auto& path : written) std::cerr << "wrote " << path << "\n";
  }
  std::cerr << "stage " << outcome.artifacts.record.stage << ": " << seconds_since(start)
            << " s\n";
  return outcome.exit_code;
}

int cmd_plan(const Options& opt) {
  auto start = std::chrono::steady_clock::now();
  std::string bytes;
  auto s = load_with_overrides(opt, bytes);
  auto outcome = pipeline::run_plan(s, bytes);
  return finish(outcome, opt, start);
}

int cmd_secure(const Options& opt) {
  auto start = std::chrono::steady_clock::now();
  std::string bytes;
  auto s = load_with_overrides(opt, bytes);
  auto outcome = pipeline::run_secure(s, bytes);
  return finish(outcome, opt, start);
}

int cmd_ctco(const Options& opt) {
  auto start = std::chrono::steady_clock::now();
  std::string bytes;
  auto s = load_with_overrides(opt, bytes);

  std::optional<Trajectories> trajectories;
  if (!opt.trajectories_path.empty()) {
    trajectories = io::trajectories_from_csv(io::read_text_file(opt.trajectories_path));
    std::cout << "trajectories: " << opt.trajectories_path << "\n";
  } else {
    auto planned = pipeline::run_plan(s, bytes);
    print_log(planned, opt);
    if (planned.exit_code != pipeline::kExitOk) {
      io::write_outputs(planned.artifacts, opt.out_dir);
      return planned.exit_code;
    }
    trajectories = std::move(planned.artifacts.trajectories);
    std::cout << "trajectories: planned internally\n";
  }

  auto outcome = pipeline::run_ctco(s, *trajectories, bytes);
  return finish(outcome, opt, start);
}

int cmd_render(const Options& opt) {
  auto start = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;
  std::string bytes;
  auto s = load_with_overrides(opt, bytes);
  std::string source = opt.artifacts_dir.empty() ? opt.out_dir : opt.artifacts_dir;

  std::optional<Trajectories> trajectories;
  std::optional<graph::FlowGraph> g;
  std::optional<flow::FlowSolution> solution;
  auto path_of = [&source](const char* name) { return (fs::path(source) / name).string(); };
  if (fs::exists(path_of("trajectories.csv"))) {
    std::string csv = io::read_text_file(path_of("trajectories.csv"));
    if (csv.find('\n') != csv.size() - 1)  // more than the header line
      trajectories = io::trajectories_from_csv(csv);
  }
  if (fs::exists(path_of("graph.json"))) {
    auto parsed = io::graph_from_json(io::read_text_file(path_of("graph.json")));
    if (!parsed.vertices.empty()) g = std::move(parsed);
  }
  if (fs::exists(path_of("flows.json"))) {
    auto parsed = io::flows_from_json(io::read_text_file(path_of("flows.json")));
    if (!parsed.flows.empty()) solution = std::move(parsed);
  }

  render::RenderInput in;
  in.scen = &s;
  in.trajectories = trajectories ? &*trajectories : nullptr;
  in.graph = g ? &*g : nullptr;
  in.solution = solution ? &*solution : nullptr;
  in.draw_envelopes = !s.co_observations.empty() && trajectories.has_value();

  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + opt.out_dir);
  std::string out_path = (fs::path(opt.out_dir) / "plot.svg").string();
  io::write_text_file(out_path, render::render_svg(in));
  std::cout << "wrote " << out_path << "\n";
  std::cerr << "stage render: " << seconds_since(start) << " s\n";
  return pipeline::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attack-resilient multi-robot trajectory planning toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--scenario", opt.scenario_path, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out_dir, "Output directory")->required();
    cmd->add_option("--seed", opt.seed, "Override every seed in the scenario")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
    cmd->add_flag("--verbose", opt.verbose, "Detailed progress to stderr");
  };

  CLI::App* plan = app.add_subcommand("plan", "Unsecured trajectory optimization");
  add_common(plan);
  CLI::App* secure =
      app.add_subcommand("secure", "Trajectory optimization with co-observation security");
  add_common(secure);
  CLI::App* ctco = app.add_subcommand("ctco", "Cross-trajectory co-observation scheduling");
  add_common(ctco);
  ctco->add_option("--trajectories", opt.trajectories_path,
                   "Input trajectories CSV (default: plan internally)")
      ->check(CLI::ExistingFile);
  ctco->add_option("--k-max", opt.k_max, "Cap on the flow-count search")
      ->each([&opt](const std::string&) { opt.k_max_set = true; });
  CLI::App* render_cmd = app.add_subcommand("render", "Re-render plot.svg from saved artifacts");
  add_common(render_cmd);
  render_cmd->add_option("--artifacts", opt.artifacts_dir,
                         "Directory holding prior outputs (default: --out)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan->parsed()) return cmd_plan(opt);
    if (secure->parsed()) return cmd_secure(opt);
    if (ctco->parsed()) return cmd_ctco(opt);
    if (render_cmd->parsed()) return cmd_render(opt);
  } catch (const coplan::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return coplan::pipeline::kExitValidation;
  } catch (const coplan::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return coplan::pipeline::kExitValidation;
  } catch (const coplan::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return coplan::pipeline::kExitError;
  } catch (const coplan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return coplan::pipeline::kExitError;
  }
  return coplan::pipeline::kExitError;
}
