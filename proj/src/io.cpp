#include "infogeo/io.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "infogeo/errors.hpp"

namespace infogeo {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Source positions

namespace {

std::pair<int, int> line_col(const std::string& text, std::size_t pos) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Minimal scanner that walks already-validated JSON text to the value at a path.
class Locator {
 public:
  explicit Locator(const std::string& s) : s_(s) {}

  std::size_t find(const JsonPath& path) {
    i_ = 0;
    ws();
    std::size_t found = i_;
    for (const auto& step : path) {
      if (!descend(step)) break;
      found = i_;
    }
    return found;
  }

 private:
  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  std::string string() {
    std::string out;
    ++i_;  // opening quote
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
      out += s_[i_++];
    }
    ++i_;
    return out;
  }
  void skip_value() {
    ws();
    if (i_ >= s_.size()) return;
    const char c = s_[i_];
    if (c == '"') {
      string();
    } else if (c == '{' || c == '[') {
      int depth = 0;
      while (i_ < s_.size()) {
        const char t = s_[i_];
        if (t == '"') {
          string();
          continue;
        }
        if (t == '{' || t == '[') ++depth;
        if (t == '}' || t == ']') {
          --depth;
          if (depth == 0) {
            ++i_;
            return;
          }
        }
        ++i_;
      }
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
             !std::isspace(static_cast<unsigned char>(s_[i_])))
        ++i_;
    }
  }
  bool descend(const std::variant<std::string, std::size_t>& step) {
    ws();
    if (i_ >= s_.size()) return false;
    if (const auto* key = std::get_if<std::string>(&step)) {
      if (s_[i_] != '{') return false;
      ++i_;
      while (true) {
        ws();
        if (i_ >= s_.size() || s_[i_] != '"') return false;
        const std::string k = string();
        ws();
        ++i_;  // ':'
        ws();
        if (k == *key) return true;
        skip_value();
        ws();
        if (i_ >= s_.size() || s_[i_] != ',') return false;
        ++i_;
      }
    }
    const std::size_t index = std::get<std::size_t>(step);
    if (s_[i_] != '[') return false;
    ++i_;
    for (std::size_t k = 0;; ++k) {
      ws();
      if (i_ >= s_.size() || s_[i_] == ']') return false;
      if (k == index) return true;
      skip_value();
      ws();
      if (i_ >= s_.size() || s_[i_] != ',') return false;
      ++i_;
    }
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

}  // namespace

JsonSource JsonSource::parse(std::string text, std::string name) {
  JsonSource src;
  src.text_ = std::move(text);
  src.name_ = std::move(name);
  try {
    src.root_ = Json::parse(src.text_);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_col(src.text_, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    // Drop the library's "[json.exception.parse_error.101] parse error at line x, column y: " prefix.
    if (const auto p = what.find(": "); p != std::string::npos && what.find("parse error") < p) what = what.substr(p + 2);
    throw ValidationError(src.name_ + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": malformed JSON: " + what);
  }
  return src;
}

int JsonSource::line_of(const JsonPath& path) const { return line_col(text_, Locator(text_).find(path)).first; }

void JsonSource::fail(const JsonPath& path, const std::string& message) const {
  throw ValidationError(name_ + ":" + std::to_string(line_of(path)) + ": " + format_path(path) + ": " + message);
}

std::string format_path(const JsonPath& path) {
  if (path.empty()) return "/";
  std::string out;
  for (const auto& step : path) {
    out += '/';
    if (const auto* k = std::get_if<std::string>(&step))
      out += *k;
    else
      out += std::to_string(std::get<std::size_t>(step));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical output

namespace {

void dump_into(const Json& j, std::string& out, int indent) {
  const std::string pad(indent, ' ');
  const std::string pad_in(indent + 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += pad_in + Json(it.key()).dump() + ": ";
        dump_into(it.value(), out, indent + 2);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_into(j[i], out, indent + 2);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        dump_into(j[i], out, indent + 2);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string canonical_dump(const Json& j) {
  std::string out;
  dump_into(j, out, 0);
  out += '\n';
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + target.parent_path().string() + ": " + ec.message());
  }
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("error while writing " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path);
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Typed readers

namespace {

class Reader {
 public:
  Reader(const JsonSource& src, const Json& j, JsonPath path) : src_(src), j_(j), path_(std::move(path)) {}

  const Json& json() const { return j_; }
  const JsonPath& path() const { return path_; }
  [[noreturn]] void fail(const std::string& msg) const { src_.fail(path_, msg); }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  Reader at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) fail("missing required field '" + key + "'");
    return child(key, j_.at(key));
  }
  Reader at(std::size_t i) const { return child(i, j_.at(i)); }
  std::size_t size() const { return j_.size(); }

  void object(const std::set<std::string>& allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) child(it.key(), it.value()).fail("unknown field '" + it.key() + "'");
  }
  void array() const {
    if (!j_.is_array()) fail("expected an array");
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }
  long long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long long>();
  }
  std::uint64_t uint64() const {
    if (j_.is_number_unsigned()) return j_.get<std::uint64_t>();
    if (j_.is_number_integer() && j_.get<long long>() >= 0) return static_cast<std::uint64_t>(j_.get<long long>());
    fail("expected a nonnegative integer");
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  Vec vec(int dim) const {
    array();
    if (static_cast<int>(size()) != dim) fail("expected " + std::to_string(dim) + " entries");
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = at(i).number();
    return v;
  }
  Mat mat(int rows, int cols) const {
    array();
    if (static_cast<int>(size()) != rows) fail("expected " + std::to_string(rows) + " rows");
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      const Reader row = at(r);
      row.array();
      if (static_cast<int>(row.size()) != cols) row.fail("expected " + std::to_string(cols) + " columns");
      for (int c = 0; c < cols; ++c) m(r, c) = row.at(c).number();
    }
    return m;
  }
  /// Square, symmetric within symTol.
  Mat sym(int dim) const {
    const Mat m = mat(dim, dim);
    if (asymmetry(m) > kSymTol) fail("matrix is not symmetric");
    return symmetrize(m);
  }
  Mat spd(int dim) const {
    Mat m = sym(dim);
    if (!is_positive_definite(m)) fail("matrix is not positive definite");
    return m;
  }
  Mat psd(int dim) const {
    Mat m = sym(dim);
    if (min_eigenvalue(m) < -kPsdTol) fail("matrix is not positive semidefinite");
    return m;
  }

 private:
  template <typename Step>
  Reader child(Step step, const Json& j) const {
    JsonPath p = path_;
    p.emplace_back(step);
    return Reader(src_, j, std::move(p));
  }

  const JsonSource& src_;
  const Json& j_;
  JsonPath path_;
};

Box read_box(const Reader& r, int dim) {
  r.object({"min", "max"});
  Box b{r.at("min").vec(dim), r.at("max").vec(dim)};
  if (!((b.max - b.min).array() >= 0.0).all()) r.fail("box has min > max");
  return b;
}

Belief read_belief(const Reader& r, int dim) {
  r.object({"mean", "cov"});
  return Belief{r.at("mean").vec(dim), r.at("cov").spd(dim)};
}

std::optional<SensorModel> read_sensor(const Reader& r, int dim) {
  if (r.json().is_string()) {
    if (r.string() != "none") r.fail("expected a sensor object or \"none\"");
    return std::nullopt;
  }
  r.object({"C", "V"});
  const Reader c = r.at("C");
  c.array();
  const int m = static_cast<int>(c.size());
  if (m < 1) c.fail("C needs at least one row");
  SensorModel s{c.mat(m, dim), r.at("V").spd(m)};
  return s;
}

Json box_to_json(const Box& b) { return Json{{"min", vector_to_json(b.min)}, {"max", vector_to_json(b.max)}}; }

Json sensor_to_json(const std::optional<SensorModel>& s) {
  if (!s) return "none";
  return Json{{"C", matrix_to_json(s->c)}, {"V", matrix_to_json(s->v)}};
}

Json cost_to_json(const CostBreakdown& c) { return Json{{"travel", c.travel}, {"info", c.info}, {"total", c.total}}; }

}  // namespace

Json vector_to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_to_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

Json belief_to_json(const Belief& b) { return Json{{"mean", vector_to_json(b.mean)}, {"cov", matrix_to_json(b.cov)}}; }

// ---------------------------------------------------------------------------
// Environment

EnvironmentFile parse_environment(const JsonSource& src) {
  const Reader root(src, src.root(), {});
  root.object({"dim", "bounds", "chi2_confidence", "obstacles", "start", "goal", "sensor_map", "process_noise"});
  const Reader dim_r = root.at("dim");
  const long long dim_ll = dim_r.integer();
  if (dim_ll < 1 || dim_ll > 3) dim_r.fail("dim must be 1, 2 or 3");
  const int dim = static_cast<int>(dim_ll);

  EnvironmentFile out;
  Environment& env = out.env;
  env.bounds = read_box(root.at("bounds"), dim);
  if (!((env.bounds.max - env.bounds.min).array() > 0.0).all()) root.at("bounds").fail("workspace bounds are empty");

  const Reader conf = root.at("chi2_confidence");
  out.chi2_confidence = conf.number();
  if (!(out.chi2_confidence > 0.0 && out.chi2_confidence < 1.0)) conf.fail("confidence must lie in (0, 1)");
  env.chi2 = chi2_quantile(dim, out.chi2_confidence);

  if (root.has("obstacles")) {
    const Reader obs = root.at("obstacles");
    obs.array();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const Reader o = obs.at(i);
      o.object({"vertices"});
      const Reader verts = o.at("vertices");
      verts.array();
      if (static_cast<int>(verts.size()) < dim + 1)
        verts.fail("an obstacle needs at least " + std::to_string(dim + 1) + " vertices");
      std::vector<Vec> v;
      for (std::size_t k = 0; k < verts.size(); ++k) v.push_back(verts.at(k).vec(dim));
      try {
        env.obstacles.emplace_back(std::move(v));
      } catch (const Error& e) {
        verts.fail(e.what());
      }
    }
  }

  env.start = read_belief(root.at("start"), dim);
  const Reader goal = root.at("goal");
  goal.object({"box", "cov"});
  env.goal_box = read_box(goal.at("box"), dim);
  env.goal_cov = goal.at("cov").spd(dim);

  out.w = ProcessNoise(root.at("process_noise").psd(dim));

  if (root.has("sensor_map")) {
    const Reader sm = root.at("sensor_map");
    sm.object({"regions", "default"});
    SensorMap map;
    if (sm.has("regions")) {
      const Reader regions = sm.at("regions");
      regions.array();
      for (std::size_t i = 0; i < regions.size(); ++i) {
        const Reader reg = regions.at(i);
        reg.object({"box", "sensor"});
        map.regions.push_back({read_box(reg.at("box"), dim), read_sensor(reg.at("sensor"), dim)});
      }
    }
    if (sm.has("default")) map.fallback = read_sensor(sm.at("default"), dim);
    out.sensor_map = std::move(map);
  }

  try {
    env.validate();
  } catch (const ValidationError& e) {
    root.fail(e.what());
  }
  if (!env.bounds.contains(env.start.mean)) root.at("start").fail("start mean lies outside the workspace");
  if (!point_collision_free(env.start, env)) root.at("start").fail("start belief is not collision free");
  return out;
}

Json environment_to_json(const EnvironmentFile& e) {
  Json j;
  j["dim"] = e.env.dim();
  j["bounds"] = box_to_json(e.env.bounds);
  j["chi2_confidence"] = e.chi2_confidence;
  Json obs = Json::array();
  for (const auto& o : e.env.obstacles) {
    Json verts = Json::array();
    for (const auto& v : o.vertices()) verts.push_back(vector_to_json(v));
    obs.push_back(Json{{"vertices", verts}});
  }
  j["obstacles"] = obs;
  j["start"] = belief_to_json(e.env.start);
  j["goal"] = Json{{"box", box_to_json(e.env.goal_box)}, {"cov", matrix_to_json(e.env.goal_cov)}};
  j["process_noise"] = matrix_to_json(e.w.matrix());
  if (e.sensor_map) {
    Json regions = Json::array();
    for (const auto& r : e.sensor_map->regions)
      regions.push_back(Json{{"box", box_to_json(r.box)}, {"sensor", sensor_to_json(r.sensor)}});
    j["sensor_map"] = Json{{"regions", regions}, {"default", sensor_to_json(e.sensor_map->fallback)}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Run configuration

RunConfig parse_config(const JsonSource& src, int dim) {
  const Reader root(src, src.root(), {});
  root.object({"planner", "simulation"});
  RunConfig out;

  if (root.has("planner")) {
    out.has_planner = true;
    const Reader p = root.at("planner");
    p.object({"algorithm", "alpha", "nodes", "ed_min", "conn_radius", "rho", "trace_max", "seed", "bnb_period",
              "clearance_step"});
    PlannerConfig& c = out.planner;
    if (p.has("algorithm")) {
      try {
        c.algorithm = algorithm_from_string(p.at("algorithm").string());
      } catch (const ValidationError& e) {
        p.at("algorithm").fail(e.what());
      }
    }
    if (p.has("alpha")) {
      c.alpha = p.at("alpha").number();
      if (c.alpha < 0.0) p.at("alpha").fail("alpha must be >= 0");
    }
    if (p.has("nodes")) {
      const long long n = p.at("nodes").integer();
      if (n < 0 || n > 100000000) p.at("nodes").fail("nodes must lie in [0, 1e8]");
      c.nodes = static_cast<int>(n);
    }
    if (p.has("ed_min")) c.ed_min = p.at("ed_min").positive();
    if (p.has("conn_radius")) c.conn_radius = p.at("conn_radius").positive();
    c.cov_bounds.rho = p.at("rho").positive();
    c.cov_bounds.trace_max = p.at("trace_max").positive();
    if (c.cov_bounds.rho * dim > c.cov_bounds.trace_max) p.at("trace_max").fail("need rho·dim <= trace_max");
    if (p.has("seed")) c.seed = p.at("seed").uint64();
    if (p.has("bnb_period")) {
      const long long b = p.at("bnb_period").integer();
      if (b < 1) p.at("bnb_period").fail("bnb_period must be >= 1");
      c.bnb_period = static_cast<int>(b);
    }
    if (p.has("clearance_step")) c.clearance_step = p.at("clearance_step").positive();
  }

  if (root.has("simulation")) {
    const Reader s = root.at("simulation");
    s.object({"model", "dt", "speed", "W", "V", "runs", "seed", "q_weight", "r_weight", "trace_stride"});
    SimulationSettings sim;
    if (s.has("model")) {
      try {
        sim.kind = vehicle_kind_from_string(s.at("model").string());
      } catch (const ValidationError& e) {
        s.at("model").fail(e.what());
      }
    }
    if (s.has("dt")) sim.dt = s.at("dt").positive();
    if (s.has("speed")) sim.speed = s.at("speed").positive();
    const int n = sim.kind == VehicleKind::SingleIntegrator ? dim : 2 * dim;
    if (s.has("W")) sim.w = s.at("W").psd(n);
    sim.v = s.at("V").spd(dim);
    if (s.has("runs")) {
      const long long r = s.at("runs").integer();
      if (r < 1 || r > 10000000) s.at("runs").fail("runs must lie in [1, 1e7]");
      sim.runs = static_cast<int>(r);
    }
    if (s.has("seed")) sim.seed = s.at("seed").uint64();
    if (s.has("q_weight")) sim.q_weight = s.at("q_weight").positive();
    if (s.has("r_weight")) sim.r_weight = s.at("r_weight").positive();
    if (s.has("trace_stride")) {
      const long long t = s.at("trace_stride").integer();
      if (t < 1) s.at("trace_stride").fail("trace_stride must be >= 1");
      sim.trace_stride = static_cast<int>(t);
    }
    out.simulation = std::move(sim);
  }
  return out;
}

Json config_to_json(const RunConfig& c) {
  Json j = Json::object();
  const PlannerConfig& p = c.planner;
  if (c.has_planner)
    j["planner"] = Json{{"algorithm", to_string(p.algorithm)},
                        {"alpha", p.alpha},
                        {"nodes", p.nodes},
                        {"ed_min", p.ed_min},
                        {"conn_radius", p.conn_radius},
                        {"rho", p.cov_bounds.rho},
                        {"trace_max", p.cov_bounds.trace_max},
                        {"seed", p.seed},
                        {"bnb_period", p.bnb_period},
                        {"clearance_step", p.clearance_step}};
  if (c.simulation) {
    const SimulationSettings& s = *c.simulation;
    Json sj{{"model", to_string(s.kind)}, {"speed", s.speed},       {"V", matrix_to_json(s.v)},
            {"runs", s.runs},             {"seed", s.seed},         {"q_weight", s.q_weight},
            {"r_weight", s.r_weight},     {"trace_stride", s.trace_stride}};
    if (s.dt) sj["dt"] = *s.dt;
    if (s.w) sj["W"] = matrix_to_json(*s.w);
    j["simulation"] = sj;
  }
  return j;
}

void apply_environment(RunConfig& cfg, const EnvironmentFile& env) {
  cfg.planner.w = env.w;
  cfg.planner.sensor_map = env.sensor_map;
}

VehicleModel make_vehicle(const SimulationSettings& s, const ProcessNoise& plan_w) {
  const int d = plan_w.dim();
  VehicleModel m;
  m.kind = s.kind;
  m.speed = s.speed;
  m.dt = s.dt ? *s.dt : (s.kind == VehicleKind::SingleIntegrator ? 5e-4 : 1.0 / 30.0);
  m.v = s.v;
  m.q_weight = s.q_weight;
  m.r_weight = s.r_weight;
  if (s.w) {
    m.w = *s.w;
  } else {
    // Travelling at `speed`, noise per unit distance becomes speed·W per second.
    const int n = m.state_dim(d);
    m.w = Mat::Zero(n, n);
    m.w.topLeftCorner(d, d) = s.speed * plan_w.matrix();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Trees and paths

Json tree_to_json(const BeliefTree& tree, const PlannerConfig& cfg, double chi2) {
  Json nodes = Json::array();
  for (int i = 0; i < static_cast<int>(tree.size()); ++i) {
    Json n = belief_to_json(tree.belief(i));
    n["id"] = i;
    n["parent"] = tree.parent(i);
    n["cost"] = tree.cost(i);
    nodes.push_back(std::move(n));
  }
  return Json{{"orientation", tree.orientation() == Orientation::Forward ? "forward" : "backward"},
              {"algorithm", to_string(cfg.algorithm)},
              {"alpha", cfg.alpha},
              {"chi2", chi2},
              {"dim", tree.dim()},
              {"process_noise", matrix_to_json(cfg.w.matrix())},
              {"nodes", nodes}};
}

BeliefTree parse_tree(const JsonSource& src) {
  const Reader root(src, src.root(), {});
  root.object({"orientation", "algorithm", "alpha", "chi2", "dim", "process_noise", "nodes"});
  const std::string o = root.at("orientation").string();
  if (o != "forward" && o != "backward") root.at("orientation").fail("expected \"forward\" or \"backward\"");
  const long long dim = root.at("dim").integer();
  if (dim < 1 || dim > 3) root.at("dim").fail("dim must be 1, 2 or 3");
  const Reader nodes = root.at("nodes");
  nodes.array();
  if (nodes.size() == 0) nodes.fail("a tree needs at least its root");
  std::vector<Belief> beliefs;
  std::vector<int> parents;
  std::vector<double> costs;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Reader n = nodes.at(i);
    n.object({"id", "parent", "cost", "mean", "cov"});
    if (n.has("id") && n.at("id").integer() != static_cast<long long>(i)) n.at("id").fail("ids must be 0, 1, 2, ...");
    beliefs.push_back(Belief{n.at("mean").vec(static_cast<int>(dim)), n.at("cov").spd(static_cast<int>(dim))});
    parents.push_back(static_cast<int>(n.at("parent").integer()));
    costs.push_back(n.at("cost").number());
  }
  try {
    return BeliefTree::from_parts(std::move(beliefs), parents, costs,
                                  o == "forward" ? Orientation::Forward : Orientation::Backward);
  } catch (const Error& e) {
    nodes.fail(e.what());
  }
}

Json path_to_json(const PathFile& p) {
  Json beliefs = Json::array();
  for (const auto& b : p.chain) beliefs.push_back(belief_to_json(b));
  Json j{{"status", p.ok ? "ok" : "failure"},
         {"algorithm", p.algorithm},
         {"alpha", p.alpha},
         {"chi2", p.chi2},
         {"dim", p.w.dim()},
         {"process_noise", matrix_to_json(p.w.matrix())},
         {"beliefs", beliefs}};
  if (p.ok)
    j["cost"] = cost_to_json(p.cost);
  else
    j["reason"] = p.reason;
  return j;
}

PathFile parse_path(const JsonSource& src) {
  const Reader root(src, src.root(), {});
  root.object({"status", "algorithm", "alpha", "chi2", "dim", "process_noise", "beliefs", "cost", "reason"});
  PathFile p;
  const std::string status = root.at("status").string();
  if (status != "ok" && status != "failure") root.at("status").fail("expected \"ok\" or \"failure\"");
  p.ok = status == "ok";
  if (root.has("algorithm")) p.algorithm = root.at("algorithm").string();
  if (root.has("reason")) p.reason = root.at("reason").string();
  p.alpha = root.at("alpha").number();
  p.chi2 = root.at("chi2").positive();
  const long long dim = root.at("dim").integer();
  if (dim < 1 || dim > 3) root.at("dim").fail("dim must be 1, 2 or 3");
  const int d = static_cast<int>(dim);
  p.w = ProcessNoise(root.at("process_noise").psd(d));
  const Reader beliefs = root.at("beliefs");
  beliefs.array();
  for (std::size_t i = 0; i < beliefs.size(); ++i) p.chain.push_back(read_belief(beliefs.at(i), d));
  if (p.ok) {
    const Reader c = root.at("cost");
    c.object({"travel", "info", "total"});
    p.cost = {c.at("travel").number(), c.at("info").number(), c.at("total").number()};
  }
  return p;
}

// ---------------------------------------------------------------------------
// Simulation output

Json stats_to_json(const MonteCarloStats& st, const VehicleModel& model) {
  Json hist = Json::object();
  for (const auto& [count, runs] : st.histogram) hist[std::to_string(count)] = runs;
  Json counts = Json::array();
  for (int c : st.counts) counts.push_back(c);
  return Json{{"runs", st.runs},
              {"measurement_mean", st.mean},
              {"measurement_std", st.stddev},
              {"histogram", hist},
              {"counts", counts},
              {"collision_rate", st.collision_rate},
              {"model",
               Json{{"kind", to_string(model.kind)},
                    {"dt", model.dt},
                    {"speed", model.speed},
                    {"W", matrix_to_json(model.w)},
                    {"V", matrix_to_json(model.v)},
                    {"q_weight", model.q_weight},
                    {"r_weight", model.r_weight}}}};
}

Json trace_to_json(const SimulationTrace& t, int stride) {
  Json steps = Json::array();
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const SimStep& s = t.steps[k];
    if (k % stride != 0 && !s.measured && k + 1 != t.steps.size()) continue;
    steps.push_back(Json{{"k", k + 1},
                         {"state", vector_to_json(s.state)},
                         {"est_mean", vector_to_json(s.est_mean)},
                         {"est_cov", matrix_to_json(s.est_cov)},
                         {"ref_mean", vector_to_json(s.ref_mean)},
                         {"ref_cov", matrix_to_json(s.ref_cov)},
                         {"measured", s.measured}});
  }
  return Json{{"measurement_count", t.measurement_count}, {"collided", t.collided}, {"steps", steps}};
}

}  // namespace infogeo
