#pragma once

// The four CLI commands as library calls. Every command validates all of its
// inputs before it writes anything, and finishes by writing manifest.json
// (render: <svg stem>.manifest.json) listing every artifact it produced.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infogeo/io.hpp"
#include "infogeo/planner.hpp"

namespace infogeo {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  std::string command;
  std::string config_hash;  // SHA-256 of the canonical effective inputs
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;  // paths as written, manifest last
  std::string version = kVersion;
  std::string status = "ok";  // "ok" | "planning_failure"
};

Json manifest_to_json(const RunManifest& m);

/// UTC ISO-8601 time. Honors SOURCE_DATE_EPOCH so reruns can be byte-identical.
std::string timestamp_now();

struct PlanOptions {
  std::string env_file;
  std::string config_file;
  std::string out_dir;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<int> nodes;
  std::optional<Algorithm> algorithm;
  std::string format = "json";
};

/// tree.json, path.json, plan.svg, manifest.json. A planning failure still
/// writes its artifacts (path.json holds the failure record) and reports
/// status "planning_failure".
RunManifest cmd_plan(const PlanOptions& opt);

struct SimulateOptions {
  std::string path_file;
  std::string config_file;
  std::string out_dir;
  std::optional<std::string> env_file;  // enables collision accounting
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<double> speed;
  std::optional<double> dt;
  std::string format = "json";
};

/// stats.json, trace.json (first run), manifest.json.
RunManifest cmd_simulate(const SimulateOptions& opt);

struct SweepOptions {
  std::string env_file;
  std::string config_file;
  std::string out_dir;
  std::vector<double> alphas;  // empty: the config's alpha
  std::vector<std::uint64_t> seeds;
  std::optional<int> nodes;
  std::optional<Algorithm> algorithm;
  std::optional<int> runs;
  std::optional<double> speed;
  std::optional<double> dt;
  std::string format = "csv";  // csv | json
};

/// One cell per (alpha, seed); failed cells are recorded in the status column.
RunManifest cmd_sweep(const SweepOptions& opt);

struct SweepRow {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string status;  // ok | planning_failure | simulation_failure
  std::optional<CostBreakdown> cost;
  std::optional<double> measurement_mean;
  std::optional<double> measurement_std;
  std::optional<double> collision_rate;
};

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct RenderOptions {
  std::string input_file;  // tree.json or path.json
  std::string out_svg;
  std::optional<std::string> env_file;
  std::optional<std::string> path_file;  // overlay when input is a tree
  std::string format = "svg";
};

RunManifest cmd_render(const RenderOptions& opt);

}  // namespace infogeo
