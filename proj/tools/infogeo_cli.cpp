// infogeo: plan, simulate, sweep and render from the command line.
//
// Exit codes: 0 ok, 2 invalid input, 3 planning failure, 4 simulation
// failure, 5 I/O error, 1 anything else.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infogeo/commands.hpp"
#include "infogeo/errors.hpp"

namespace {

using namespace infogeo;

enum Exit { kOk = 0, kOther = 1, kValidation = 2, kPlanning = 3, kSimulation = 4, kIo = 5 };

template <typename T>
std::optional<T> opt_if(const CLI::Option* o, const T& v) {
  return o->count() ? std::optional<T>(v) : std::nullopt;
}

void report(const RunManifest& m) {
  for (const auto& f : m.outputs) std::cout << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief-space motion planning under an information-geometric cost"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  const std::vector<std::string> algorithms{"basic", "improved", "backward"};

  // plan
  PlanOptions plan_opt;
  double plan_alpha = 0.0;
  std::uint64_t plan_seed = 0;
  int plan_nodes = 0;
  std::string plan_algorithm;
  auto* plan = app.add_subcommand("plan", "Grow a belief tree and extract the best path");
  plan->add_option("--env", plan_opt.env_file, "Environment JSON")->required();
  plan->add_option("--config", plan_opt.config_file, "Run config JSON")->required();
  plan->add_option("--out", plan_opt.out_dir, "Output directory")->required();
  auto* plan_alpha_o = plan->add_option("--alpha", plan_alpha, "Information weight (overrides config)");
  auto* plan_seed_o = plan->add_option("--seed", plan_seed, "Planner seed (overrides config)");
  auto* plan_nodes_o = plan->add_option("--nodes", plan_nodes, "Node budget N (overrides config)");
  auto* plan_alg_o = plan->add_option("--algorithm", plan_algorithm, "basic | improved | backward")
                         ->check(CLI::IsMember(algorithms));
  plan->add_option("--format", plan_opt.format, "json")->check(CLI::IsMember({"json"}));

  // simulate
  SimulateOptions sim_opt;
  std::string sim_env;
  int sim_runs = 0;
  std::uint64_t sim_seed = 0;
  double sim_speed = 0.0, sim_dt = 0.0;
  auto* sim = app.add_subcommand("simulate", "Follow a planned path with event-triggered sensing");
  sim->add_option("path", sim_opt.path_file, "path.json from plan")->required();
  sim->add_option("--config", sim_opt.config_file, "Run config JSON with a simulation section")->required();
  sim->add_option("--out", sim_opt.out_dir, "Output directory")->required();
  auto* sim_env_o = sim->add_option("--env", sim_env, "Environment JSON for collision accounting");
  auto* sim_runs_o = sim->add_option("--runs", sim_runs, "Monte Carlo runs");
  auto* sim_seed_o = sim->add_option("--seed", sim_seed, "Simulation seed");
  auto* sim_speed_o = sim->add_option("--speed", sim_speed, "Nominal speed");
  auto* sim_dt_o = sim->add_option("--dt", sim_dt, "Time step");
  sim->add_option("--format", sim_opt.format, "json")->check(CLI::IsMember({"json"}));

  // sweep
  SweepOptions sweep_opt;
  int sweep_nodes = 0, sweep_runs = 0;
  std::string sweep_algorithm;
  double sweep_speed = 0.0, sweep_dt = 0.0;
  auto* sweep = app.add_subcommand("sweep", "Plan (and simulate) over every (alpha, seed) pair");
  sweep->add_option("--env", sweep_opt.env_file, "Environment JSON")->required();
  sweep->add_option("--config", sweep_opt.config_file, "Run config JSON")->required();
  sweep->add_option("--out", sweep_opt.out_dir, "Output directory")->required();
  sweep->add_option("--alpha", sweep_opt.alphas, "Alpha values (repeat or comma separated)")->delimiter(',');
  sweep->add_option("--seed", sweep_opt.seeds, "Planner seeds (repeat or comma separated)")
      ->delimiter(',')
      ->required();
  auto* sweep_nodes_o = sweep->add_option("--nodes", sweep_nodes, "Node budget N");
  auto* sweep_alg_o = sweep->add_option("--algorithm", sweep_algorithm, "basic | improved | backward")
                          ->check(CLI::IsMember(algorithms));
  auto* sweep_runs_o = sweep->add_option("--runs", sweep_runs, "Monte Carlo runs per cell");
  auto* sweep_speed_o = sweep->add_option("--speed", sweep_speed, "Nominal speed");
  auto* sweep_dt_o = sweep->add_option("--dt", sweep_dt, "Time step");
  sweep->add_option("--format", sweep_opt.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  // render
  RenderOptions render_opt;
  std::string render_env, render_path;
  auto* render = app.add_subcommand("render", "Draw a tree or path as SVG");
  render->add_option("input", render_opt.input_file, "tree.json or path.json")->required();
  render->add_option("--out", render_opt.out_svg, "Output SVG file")->required();
  auto* render_env_o = render->add_option("--env", render_env, "Environment JSON");
  auto* render_path_o = render->add_option("--path", render_path, "path.json to overlay on a tree");
  render->add_option("--format", render_opt.format, "svg")->check(CLI::IsMember({"svg"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (plan->parsed()) {
      plan_opt.alpha = opt_if(plan_alpha_o, plan_alpha);
      plan_opt.seed = opt_if(plan_seed_o, plan_seed);
      plan_opt.nodes = opt_if(plan_nodes_o, plan_nodes);
      if (plan_alg_o->count()) plan_opt.algorithm = algorithm_from_string(plan_algorithm);
      const RunManifest m = cmd_plan(plan_opt);
      report(m);
      if (m.status == "planning_failure") {
        std::cerr << "infogeo: planning failed; see path.json\n";
        return kPlanning;
      }
    } else if (sim->parsed()) {
      sim_opt.env_file = opt_if(sim_env_o, sim_env);
      sim_opt.runs = opt_if(sim_runs_o, sim_runs);
      sim_opt.seed = opt_if(sim_seed_o, sim_seed);
      sim_opt.speed = opt_if(sim_speed_o, sim_speed);
      sim_opt.dt = opt_if(sim_dt_o, sim_dt);
      report(cmd_simulate(sim_opt));
    } else if (sweep->parsed()) {
      sweep_opt.nodes = opt_if(sweep_nodes_o, sweep_nodes);
      if (sweep_alg_o->count()) sweep_opt.algorithm = algorithm_from_string(sweep_algorithm);
      sweep_opt.runs = opt_if(sweep_runs_o, sweep_runs);
      sweep_opt.speed = opt_if(sweep_speed_o, sweep_speed);
      sweep_opt.dt = opt_if(sweep_dt_o, sweep_dt);
      report(cmd_sweep(sweep_opt));
    } else if (render->parsed()) {
      render_opt.env_file = opt_if(render_env_o, render_env);
      render_opt.path_file = opt_if(render_path_o, render_path);
      report(cmd_render(render_opt));
    }
  } catch (const ValidationError& e) {
    std::cerr << "infogeo: " << e.what() << "\n";
    return kValidation;
  } catch (const DimensionMismatch& e) {
    std::cerr << "infogeo: " << e.what() << "\n";
    return kValidation;
  } catch (const InvalidArgument& e) {
    std::cerr << "infogeo: " << e.what() << "\n";
    return kValidation;
  } catch (const NotPositiveDefinite& e) {
    std::cerr << "infogeo: " << e.what() << "\n";
    return kValidation;
  } catch (const PlanningFailure& e) {
    std::cerr << "infogeo: planning failed: " << e.what() << "\n";
    return kPlanning;
  } catch (const SimulationError& e) {
    std::cerr << "infogeo: simulation failed: " << e.what() << "\n";
    return kSimulation;
  } catch (const IoError& e) {
    std::cerr << "infogeo: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "infogeo: " << e.what() << "\n";
    return kOther;
  }
  return kOk;
}
