#pragma once

// Small environments and helpers shared by the test binaries.

#include <initializer_list>
#include <string>
#include <vector>

#include "infogeo/geometry.hpp"
#include "infogeo/planner.hpp"

namespace fixture {

using namespace infogeo;

inline Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

inline Mat iso(int d, double s) { return s * Mat::Identity(d, d); }

inline ConvexObstacle rect(double x0, double y0, double x1, double y1) {
  return ConvexObstacle({v2(x0, y0), v2(x1, y0), v2(x1, y1), v2(x0, y1)});
}

/// [0,1]² workspace, start (0.1, 0.1), goal box [0.8, 0.95]², χ² at 90 %.
inline Environment unit_square(std::vector<ConvexObstacle> obstacles = {}, double start_cov = 1e-4,
                               double goal_cov = 1e-3) {
  Environment env;
  env.bounds = Box{v2(0, 0), v2(1, 1)};
  env.obstacles = std::move(obstacles);
  env.start = Belief{v2(0.1, 0.1), iso(2, start_cov)};
  env.goal_box = Box{v2(0.8, 0.8), v2(0.95, 0.95)};
  env.goal_cov = iso(2, goal_cov);
  env.chi2 = chi2_quantile(2, 0.9);
  return env;
}

/// 1-D corridor [0, 1], start 0.05, goal [0.9, 0.95].
inline Environment corridor_1d() {
  Environment env;
  env.bounds = Box{Vec::Constant(1, 0.0), Vec::Constant(1, 1.0)};
  env.start = Belief{Vec::Constant(1, 0.05), iso(1, 1e-5)};
  env.goal_box = Box{Vec::Constant(1, 0.9), Vec::Constant(1, 0.95)};
  env.goal_cov = iso(1, 1e-3);
  env.chi2 = chi2_quantile(1, 0.9);
  return env;
}

inline PlannerConfig config(Algorithm a, double alpha, int nodes, std::uint64_t seed, int dim = 2) {
  PlannerConfig c;
  c.algorithm = a;
  c.alpha = alpha;
  c.w = ProcessNoise::isotropic(dim, 1e-3);
  c.nodes = nodes;
  c.ed_min = 0.1;
  c.conn_radius = 1.5;
  c.cov_bounds = CovSampleBounds{1e-5, dim * 2e-3};
  c.seed = seed;
  c.bnb_period = 100;
  return c;
}

}  // namespace fixture
