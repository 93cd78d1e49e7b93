#include "infogeo/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>

#include "infogeo/errors.hpp"
#include "infogeo/parallel.hpp"
#include "infogeo/render.hpp"
#include "infogeo/sim.hpp"

namespace infogeo {

namespace fs = std::filesystem;

Json manifest_to_json(const RunManifest& m) {
  return Json{{"command", m.command},   {"config_hash", m.config_hash}, {"seed", m.seed},
              {"started_at", m.started_at}, {"finished_at", m.finished_at}, {"outputs", m.outputs},
              {"version", m.version},   {"status", m.status}};
}

std::string timestamp_now() {
  std::time_t t;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

JsonSource load(const std::string& path) { return JsonSource::parse(read_file(path), path); }

void require_format(const std::string& got, std::initializer_list<const char*> allowed, const char* command) {
  for (const char* a : allowed)
    if (got == a) return;
  throw ValidationError(std::string(command) + ": unsupported --format '" + got + "'");
}

// Artifacts are collected in memory and written only after everything succeeded.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  void commit(RunManifest& m) {
    for (const auto& [name, _] : files_) m.outputs.push_back(name);
    const std::string manifest_name = manifest_name_.empty() ? "manifest.json" : manifest_name_;
    m.outputs.push_back(manifest_name);
    for (const auto& [name, content] : files_) write_file_atomic(path(name), content);
    m.finished_at = timestamp_now();
    write_file_atomic(path(manifest_name), canonical_dump(manifest_to_json(m)));
  }
  void set_manifest_name(std::string n) { manifest_name_ = std::move(n); }

 private:
  std::string path(const std::string& name) const { return dir_.empty() ? name : (fs::path(dir_) / name).string(); }
  std::string dir_;
  std::string manifest_name_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct PlanInputs {
  EnvironmentFile env;
  RunConfig cfg;
};

PlanInputs load_plan_inputs(const std::string& env_file, const std::string& config_file) {
  PlanInputs in;
  in.env = parse_environment(load(env_file));
  in.cfg = parse_config(load(config_file), in.env.env.dim());
  if (!in.cfg.has_planner) throw ValidationError(config_file + ": missing required section 'planner'");
  apply_environment(in.cfg, in.env);
  return in;
}

void apply_sim_overrides(SimulationSettings& s, const std::optional<int>& runs, const std::optional<std::uint64_t>& seed,
                         const std::optional<double>& speed, const std::optional<double>& dt) {
  if (runs) {
    if (*runs < 1) throw ValidationError("--runs must be >= 1");
    s.runs = *runs;
  }
  if (seed) s.seed = *seed;
  if (speed) {
    if (!(*speed > 0.0)) throw ValidationError("--speed must be positive");
    s.speed = *speed;
  }
  if (dt) {
    if (!(*dt > 0.0)) throw ValidationError("--dt must be positive");
    s.dt = *dt;
  }
}

PathFile make_path_file(const PlannerConfig& cfg, double chi2) {
  PathFile p;
  p.algorithm = to_string(cfg.algorithm);
  p.alpha = cfg.alpha;
  p.chi2 = chi2;
  p.w = cfg.w;
  return p;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

RunManifest cmd_plan(const PlanOptions& opt) {
  RunManifest m;
  m.command = "plan";
  m.started_at = timestamp_now();
  require_format(opt.format, {"json"}, "plan");

  PlanInputs in = load_plan_inputs(opt.env_file, opt.config_file);
  PlannerConfig& cfg = in.cfg.planner;
  if (opt.alpha) cfg.alpha = *opt.alpha;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.nodes) cfg.nodes = *opt.nodes;
  if (opt.algorithm) cfg.algorithm = *opt.algorithm;
  const Environment& env = in.env.env;
  cfg.validate(env.dim());
  m.seed = cfg.seed;
  m.config_hash = sha256_hex(canonical_dump(
      Json{{"command", "plan"}, {"environment", environment_to_json(in.env)}, {"config", config_to_json(in.cfg)}}));

  std::optional<BeliefTree> tree;
  PathFile path = make_path_file(cfg, env.chi2);
  try {
    tree.emplace(plan(cfg, env));
    PlannedPath best = extract_path(*tree, env, cfg);
    path.ok = true;
    path.chain = std::move(best.chain);
    path.cost = best.cost;
  } catch (const PlanningFailure& e) {
    path.ok = false;
    path.reason = e.what();
    m.status = "planning_failure";
  }

  Outputs out(opt.out_dir);
  if (tree) out.add("tree.json", canonical_dump(tree_to_json(*tree, cfg, env.chi2)));
  out.add("path.json", canonical_dump(path_to_json(path)));
  if (env.dim() == 2) {
    RenderScene scene;
    scene.env = &env;
    scene.tree = tree ? &*tree : nullptr;
    scene.path = path.ok ? &path.chain : nullptr;
    scene.chi2 = env.chi2;
    scene.tree_ellipses = false;
    out.add("plan.svg", render_svg(scene));
  }
  out.commit(m);
  return m;
}

// ---------------------------------------------------------------------------

RunManifest cmd_simulate(const SimulateOptions& opt) {
  RunManifest m;
  m.command = "simulate";
  m.started_at = timestamp_now();
  require_format(opt.format, {"json"}, "simulate");

  const JsonSource path_src = load(opt.path_file);
  const PathFile path = parse_path(path_src);
  const int d = path.w.dim();
  std::optional<EnvironmentFile> env;
  if (opt.env_file) {
    env = parse_environment(load(*opt.env_file));
    if (env->env.dim() != d) throw ValidationError(*opt.env_file + ": dimension differs from the path's");
  }
  RunConfig rc = parse_config(load(opt.config_file), d);
  if (!rc.simulation) throw ValidationError(opt.config_file + ": missing required section 'simulation'");
  SimulationSettings& s = *rc.simulation;
  apply_sim_overrides(s, opt.runs, opt.seed, opt.speed, opt.dt);
  const VehicleModel model = make_vehicle(s, path.w);
  model.validate(d);
  m.seed = s.seed;

  if (!path.ok) throw SimulationError(opt.path_file + ": holds a planning failure record, nothing to follow");
  if (path.chain.size() < 2) throw SimulationError(opt.path_file + ": a path needs at least two beliefs");

  Json hash_in{{"command", "simulate"}, {"path", path_to_json(path)}, {"config", config_to_json(rc)}};
  if (env) hash_in["environment"] = environment_to_json(*env);
  m.config_hash = sha256_hex(canonical_dump(hash_in));

  SimulationTrace first;
  const MonteCarloStats st = monte_carlo(path.chain, model, path.w, s.runs, path.chi2, s.seed,
                                         env ? &env->env : nullptr, &first);

  Outputs out(opt.out_dir);
  out.add("stats.json", canonical_dump(stats_to_json(st, model)));
  out.add("trace.json", canonical_dump(trace_to_json(first, s.trace_stride)));
  out.commit(m);
  return m;
}

// ---------------------------------------------------------------------------

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string csv =
      "alpha,seed,travel_cost,info_cost,total_cost,measurement_mean,measurement_std,collision_rate,status\n";
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& r : rows) {
    csv += fmt(r.alpha) + "," + std::to_string(r.seed) + ",";
    if (r.cost)
      csv += fmt(r.cost->travel) + "," + fmt(r.cost->info) + "," + fmt(r.cost->total) + ",";
    else
      csv += ",,,";
    csv += opt(r.measurement_mean) + "," + opt(r.measurement_std) + "," + opt(r.collision_rate) + "," + r.status +
           "\n";
  }
  return csv;
}

RunManifest cmd_sweep(const SweepOptions& opt) {
  RunManifest m;
  m.command = "sweep";
  m.started_at = timestamp_now();
  require_format(opt.format, {"csv", "json"}, "sweep");
  if (opt.seeds.empty()) throw ValidationError("sweep: at least one --seed is required");

  PlanInputs in = load_plan_inputs(opt.env_file, opt.config_file);
  PlannerConfig& base = in.cfg.planner;
  if (opt.nodes) base.nodes = *opt.nodes;
  if (opt.algorithm) base.algorithm = *opt.algorithm;
  const std::vector<double> alphas = opt.alphas.empty() ? std::vector<double>{base.alpha} : opt.alphas;
  for (double a : alphas)
    if (!(a >= 0.0) || !std::isfinite(a)) throw ValidationError("sweep: every alpha must be finite and >= 0");
  base.validate(in.env.env.dim());

  std::optional<VehicleModel> model;
  if (in.cfg.simulation) {
    apply_sim_overrides(*in.cfg.simulation, opt.runs, std::nullopt, opt.speed, opt.dt);
    model = make_vehicle(*in.cfg.simulation, base.w);
    model->validate(in.env.env.dim());
  }
  m.seed = opt.seeds.front();
  Json seeds = Json::array();
  for (auto s : opt.seeds) seeds.push_back(s);
  m.config_hash = sha256_hex(canonical_dump(Json{{"command", "sweep"},
                                                 {"environment", environment_to_json(in.env)},
                                                 {"config", config_to_json(in.cfg)},
                                                 {"alphas", alphas},
                                                 {"seeds", seeds}}));

  const Environment& env = in.env.env;
  std::vector<SweepRow> rows(alphas.size() * opt.seeds.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    SweepRow& row = rows[i];
    PlannerConfig cfg = base;
    cfg.alpha = row.alpha = alphas[i / opt.seeds.size()];
    cfg.seed = row.seed = opt.seeds[i % opt.seeds.size()];
    PlannedPath best;
    try {
      const BeliefTree tree = plan(cfg, env);
      best = extract_path(tree, env, cfg);
    } catch (const PlanningFailure&) {
      row.status = "planning_failure";
      return;
    }
    row.cost = best.cost;
    row.status = "ok";
    if (!model) return;
    try {
      if (best.chain.size() < 2) throw SimulationError("path has a single belief");
      const MonteCarloStats st = monte_carlo(best.chain, *model, cfg.w, in.cfg.simulation->runs, env.chi2,
                                             in.cfg.simulation->seed, &env);
      row.measurement_mean = st.mean;
      row.measurement_std = st.stddev;
      row.collision_rate = st.collision_rate;
    } catch (const SimulationError&) {
      row.status = "simulation_failure";
    }
  });

  Outputs out(opt.out_dir);
  if (opt.format == "csv") {
    out.add("sweep.csv", sweep_csv(rows));
  } else {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json j{{"alpha", r.alpha}, {"seed", r.seed}, {"status", r.status}};
      if (r.cost) j["cost"] = Json{{"travel", r.cost->travel}, {"info", r.cost->info}, {"total", r.cost->total}};
      if (r.measurement_mean) j["measurement_mean"] = *r.measurement_mean;
      if (r.measurement_std) j["measurement_std"] = *r.measurement_std;
      if (r.collision_rate) j["collision_rate"] = *r.collision_rate;
      arr.push_back(std::move(j));
    }
    out.add("sweep.json", canonical_dump(Json{{"rows", arr}}));
  }
  out.commit(m);
  return m;
}

// ---------------------------------------------------------------------------

RunManifest cmd_render(const RenderOptions& opt) {
  RunManifest m;
  m.command = "render";
  m.started_at = timestamp_now();
  require_format(opt.format, {"svg"}, "render");

  const JsonSource src = load(opt.input_file);
  const Json& root = src.root();
  std::optional<BeliefTree> tree;
  std::optional<PathFile> path;
  double chi2 = 0.0;
  if (root.is_object() && root.contains("nodes")) {
    tree.emplace(parse_tree(src));
    const Json& c = root.at("chi2");
    if (!c.is_number() || !(c.get<double>() > 0.0)) src.fail({"chi2"}, "expected a positive number");
    chi2 = c.get<double>();
  } else if (root.is_object() && root.contains("beliefs")) {
    path = parse_path(src);
    chi2 = path->chi2;
  } else {
    src.fail({}, "expected a tree (with 'nodes') or a path (with 'beliefs')");
  }
  if (opt.path_file) {
    if (path) throw ValidationError("render: --path overlays a tree; the input already is a path");
    path = parse_path(load(*opt.path_file));
  }
  std::optional<EnvironmentFile> env;
  if (opt.env_file) env = parse_environment(load(*opt.env_file));

  RenderScene scene;
  scene.env = env ? &env->env : nullptr;
  scene.tree = tree ? &*tree : nullptr;
  scene.path = path && path->ok ? &path->chain : nullptr;
  scene.chi2 = chi2;
  const std::string svg = render_svg(scene);

  Json hash_in{{"command", "render"}, {"input", root}};
  if (env) hash_in["environment"] = environment_to_json(*env);
  if (opt.path_file && path) hash_in["path"] = path_to_json(*path);
  m.config_hash = sha256_hex(canonical_dump(hash_in));

  const fs::path target(opt.out_svg);
  Outputs out(target.parent_path().string());
  out.add(target.filename().string(), svg);
  out.set_manifest_name(target.stem().string() + ".manifest.json");
  out.commit(m);
  return m;
}

}  // namespace infogeo
