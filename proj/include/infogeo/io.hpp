#pragma once

// JSON artifacts: environments, run configs, trees, paths and statistics.
// Output is canonical (sorted keys, 17 significant digits) so identical runs
// produce identical bytes. Input errors carry file:line positions.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "infogeo/planner.hpp"
#include "infogeo/sim.hpp"

namespace infogeo {

using Json = nlohmann::json;
using JsonPath = std::vector<std::variant<std::string, std::size_t>>;

/// Parsed JSON text that can map a path back to its source line.
class JsonSource {
 public:
  /// Throws ValidationError "name:line:col: ..." on malformed JSON.
  static JsonSource parse(std::string text, std::string name);

  const Json& root() const { return root_; }
  const std::string& name() const { return name_; }
  /// Line of the value at `path`, or of its deepest existing ancestor.
  int line_of(const JsonPath& path) const;
  [[noreturn]] void fail(const JsonPath& path, const std::string& message) const;

 private:
  std::string text_;
  std::string name_;
  Json root_;
};

std::string format_path(const JsonPath& path);

/// Pretty-printed, sorted keys, doubles as %.17g, non-finite doubles as null.
std::string canonical_dump(const Json& j);

std::string read_file(const std::string& path);
/// Writes via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);
std::string sha256_hex(const std::string& data);

// ---------------------------------------------------------------------------

struct EnvironmentFile {
  Environment env;
  ProcessNoise w;
  std::optional<SensorMap> sensor_map;
  double chi2_confidence = 0.9;
};

EnvironmentFile parse_environment(const JsonSource& src);
Json environment_to_json(const EnvironmentFile& e);

struct SimulationSettings {
  VehicleKind kind = VehicleKind::SingleIntegrator;
  std::optional<double> dt;
  double speed = 0.1;
  std::optional<Mat> w;  // default: speed·W_plan on the position block
  Mat v;
  double q_weight = 1.0;
  double r_weight = 0.1;
  int runs = 100;
  std::uint64_t seed = 0;
  int trace_stride = 1;
};

/// Concrete vehicle for a plan with noise intensity `plan_w`.
VehicleModel make_vehicle(const SimulationSettings& s, const ProcessNoise& plan_w);

struct RunConfig {
  PlannerConfig planner;  // w and sensor_map are filled from the environment
  bool has_planner = false;
  std::optional<SimulationSettings> simulation;
};

/// `dim` sizes matrix-valued fields. Both sections are optional here; commands
/// check for the one they need.
RunConfig parse_config(const JsonSource& src, int dim);
Json config_to_json(const RunConfig& c);

/// Copies W and the sensor map into the planner config.
void apply_environment(RunConfig& cfg, const EnvironmentFile& env);

Json belief_to_json(const Belief& b);
Json matrix_to_json(const Mat& m);
Json vector_to_json(const Vec& v);

Json tree_to_json(const BeliefTree& tree, const PlannerConfig& cfg, double chi2);
BeliefTree parse_tree(const JsonSource& src);

struct PathFile {
  bool ok = false;
  std::string reason;
  std::string algorithm;
  double alpha = 0.0;
  double chi2 = 0.0;
  ProcessNoise w;
  BeliefChain chain;
  CostBreakdown cost;
};

Json path_to_json(const PathFile& p);
PathFile parse_path(const JsonSource& src);

Json stats_to_json(const MonteCarloStats& st, const VehicleModel& model);
Json trace_to_json(const SimulationTrace& t, int stride);

}  // namespace infogeo
