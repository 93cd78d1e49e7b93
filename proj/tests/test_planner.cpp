#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "infogeo/errors.hpp"
#include "infogeo/planner.hpp"
#include "oracles.hpp"

using namespace infogeo;
using fixture::iso;
using fixture::rect;
using fixture::v2;

namespace {

// Algorithms 1 and 4 accept an edge only when it is already lossless; a narrow
// covariance band keeps the acceptance rate workable at small budgets.
PlannerConfig narrow(PlannerConfig c, int dim = 2) {
  c.cov_bounds = dim == 1 ? CovSampleBounds{5e-4, 7e-4} : CovSampleBounds{5e-4, 1.1e-3};
  return c;
}

Belief scalar_belief(double m, double c) { return Belief{Vec::Constant(1, m), Mat::Constant(1, 1, c)}; }

Belief random_belief(int d, Rng& rng) {
  Vec m(d);
  for (int k = 0; k < d; ++k) m(k) = oracle::uniform(rng, 0, 1);
  return Belief{m, oracle::random_spd(d, 1e-5, 1e-2, rng)};
}

// Every node's stored cost equals its parent's cost plus the edge cost.
double worst_cost_gap(const BeliefTree& t, const PlannerConfig& cfg) {
  double worst = 0.0;
  for (int i = 1; i < static_cast<int>(t.size()); ++i) {
    const int p = t.parent(i);
    const double edge = t.orientation() == Orientation::Forward
                            ? steering_cost(t.belief(p), t.belief(i), cfg.alpha, cfg.w).total
                            : steering_cost(t.belief(i), t.belief(p), cfg.alpha, cfg.w).total;
    worst = std::max(worst, std::abs(t.cost(i) - t.cost(p) - edge) / std::max(1.0, t.cost(i)));
  }
  return worst;
}

double best_goal_cost(const BeliefTree& t, const Environment& env) {
  const auto b = best_goal_node(t, env);
  return b ? t.cost(*b) : INFINITY;
}

}  // namespace

TEST_CASE("nearest and neighbors match a linear scan") {
  Rng rng(11);
  for (int d = 1; d <= 3; ++d) {
    BeliefTree tree(random_belief(d, rng), Orientation::Forward);
    for (int i = 1; i < 200; ++i) tree.add(random_belief(d, rng), rng() % i, 0.0);
    for (int q = 0; q < 100; ++q) {
      const Belief b = random_belief(d, rng);
      double best = INFINITY;
      int arg = -1;
      std::vector<int> within;
      for (int i = 0; i < static_cast<int>(tree.size()); ++i) {
        const double dd = dhat(tree.belief(i), b);
        if (dd < best) best = dd, arg = i;
        if (dd <= 0.3) within.push_back(i);
      }
      CHECK(nearest(tree, b) == arg);
      CHECK(neighbors(tree, b, 0.3) == within);
    }
  }
  BeliefTree t(scalar_belief(0, 1), Orientation::Forward);
  CHECK_THROWS_AS(neighbors(t, scalar_belief(0, 1), -1.0), InvalidArgument);
  CHECK_THROWS_AS(nearest(t, Belief{v2(0, 0), iso(2, 1)}), DimensionMismatch);
}

TEST_CASE("dhat is a metric") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const int d = 1 + i % 3;
    const Belief a = random_belief(d, rng), b = random_belief(d, rng), c = random_belief(d, rng);
    CHECK(dhat(a, a) == 0.0);
    CHECK(dhat(a, b) == doctest::Approx(dhat(b, a)).epsilon(1e-12));
    CHECK(dhat(a, c) <= dhat(a, b) + dhat(b, c) + 1e-12);
  }
}

TEST_CASE("scale clips to the step size") {
  const Belief near = scalar_belief(0, 1), far = scalar_belief(10, 1);
  const Belief s = scale(near, far, 2.0);
  CHECK(s.mean(0) == doctest::Approx(2.0));
  CHECK(s.cov(0, 0) == doctest::Approx(1.0));
  const Belief close = scalar_belief(1, 1);
  CHECK(scale(near, close, 2.0).mean(0) == 1.0);
  CHECK_THROWS_AS(scale(near, far, 0.0), InvalidArgument);

  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    const int d = 1 + i % 3;
    const Belief a = random_belief(d, rng), b = random_belief(d, rng);
    const double step = oracle::uniform(rng, 0.01, 0.5);
    const Belief c = scale(a, b, step);
    CHECK(dhat(a, c) <= step * (1 + 1e-9));
    if (dhat(a, b) > step) CHECK(dhat(a, c) == doctest::Approx(step).epsilon(1e-9));
    CHECK(min_eigenvalue(c.cov) > 0.0);
  }

  const Environment env = fixture::unit_square({rect(0.4, 0.4, 0.6, 0.6)});
  const Belief from{v2(0.2, 0.5), iso(2, 1e-4)};
  CHECK_FALSE(scale_checked(from, Belief{v2(0.5, 0.5), iso(2, 1e-4)}, 1.0, env).has_value());
  CHECK(scale_checked(from, Belief{v2(0.5, 0.5), iso(2, 1e-4)}, 0.1, env).has_value());
}

TEST_CASE("connection radius") {
  PlannerConfig cfg = fixture::config(Algorithm::Basic, 0.0, 10, 1);
  CHECK(connection_radius(1, cfg, 2) == cfg.ed_min);
  cfg.ed_min = 100;
  cfg.conn_radius = 1.0;
  CHECK(connection_radius(100, cfg, 2) == doctest::Approx(std::sqrt(std::log(100.0) / 100.0)));
  CHECK(connection_radius(1000, cfg, 3) == doctest::Approx(std::cbrt(std::log(1000.0) / 1000.0)));
  cfg.ed_min = 0.01;
  CHECK(connection_radius(100, cfg, 2) == 0.01);
  CHECK_THROWS_AS(connection_radius(0, cfg, 2), InvalidArgument);
  // Nonincreasing past the first few nodes.
  cfg.ed_min = 100;
  for (std::size_t n = 3; n < 5000; n += 7) CHECK(connection_radius(n + 1, cfg, 2) <= connection_radius(n, cfg, 2));
}

TEST_CASE("single-node budget gives a root-only tree") {
  const Environment env = fixture::unit_square();
  for (Algorithm a : {Algorithm::Basic, Algorithm::Improved, Algorithm::Backward}) {
    const BeliefTree t = plan(fixture::config(a, 0.3, 1, 1), env);
    CHECK(t.size() == 1);
    CHECK(t.cost(0) == 0.0);
    if (a != Algorithm::Backward) CHECK_THROWS_AS(extract_path(t, env, fixture::config(a, 0.3, 1, 1)), PlanningFailure);
  }
  // A backward root-only tree still serves a start that sees the goal directly.
  const PlannerConfig bc = fixture::config(Algorithm::Backward, 0.3, 1, 1);
  CHECK(extract_path(plan(bc, env), env, bc).chain.size() == 2);
}

TEST_CASE("config validation") {
  PlannerConfig c = fixture::config(Algorithm::Basic, 0.3, 100, 1);
  CHECK_NOTHROW(c.validate(2));
  c.alpha = -1;
  CHECK_THROWS(c.validate(2));
  c = fixture::config(Algorithm::Basic, 0.3, -1, 1);
  CHECK_THROWS(c.validate(2));
  c = fixture::config(Algorithm::Basic, 0.3, 100, 1);
  CHECK_THROWS(c.validate(3));  // W is 2-D
  c.sensor_map = SensorMap{};
  c.algorithm = Algorithm::Improved;
  CHECK_THROWS(c.validate(2));
  CHECK(algorithm_from_string(to_string(Algorithm::Backward)) == Algorithm::Backward);
  CHECK_THROWS(algorithm_from_string("dijkstra"));
}

TEST_CASE("1-D corridor reaches near-straight cost at zero alpha") {
  Environment env = fixture::corridor_1d();
  env.start.cov(0, 0) = 6e-4;
  for (Algorithm a : {Algorithm::Basic, Algorithm::Improved}) {
    const PlannerConfig cfg = narrow(fixture::config(a, 0.0, 1500, 3, 1), 1);
    const BeliefTree t = plan(cfg, env);
    const PlannedPath p = extract_path(t, env, cfg);
    CHECK(p.cost.total <= 0.85 * 1.05);
    CHECK(p.cost.total >= 0.85 - 1e-9);
    CHECK(p.chain.front().mean(0) == 0.05);
    CHECK(in_goal(p.chain.back(), env));
  }
  const PlannerConfig cfg = narrow(fixture::config(Algorithm::Backward, 0.0, 1500, 3, 1), 1);
  const BeliefTree t = plan(cfg, env);
  const PlannedPath p = extract_path(t, env, cfg);
  // Backward root sits at the goal-box center.
  CHECK(p.cost.total <= 0.875 * 1.05);
  CHECK(p.chain.front().mean(0) == 0.05);
}

TEST_CASE("planning is deterministic in the seed") {
  const Environment env = fixture::unit_square({rect(0.4, 0.3, 0.6, 0.7)});
  for (Algorithm a : {Algorithm::Basic, Algorithm::Improved, Algorithm::Backward}) {
    const BeliefTree t1 = plan(fixture::config(a, 0.3, 400, 9), env);
    const BeliefTree t2 = plan(fixture::config(a, 0.3, 400, 9), env);
    const BeliefTree t3 = plan(fixture::config(a, 0.3, 400, 10), env);
    REQUIRE(t1.size() == t2.size());
    bool same = true;
    for (int i = 0; i < static_cast<int>(t1.size()); ++i)
      same = same && t1.parent(i) == t2.parent(i) && t1.cost(i) == t2.cost(i) &&
             t1.belief(i).mean == t2.belief(i).mean && t1.belief(i).cov == t2.belief(i).cov;
    CHECK(same);
    bool differs = t1.size() != t3.size();
    for (int i = 0; !differs && i < static_cast<int>(t1.size()); ++i) differs = t1.belief(i).mean != t3.belief(i).mean;
    CHECK(differs);
  }
}

TEST_CASE("tree invariants") {
  const Environment env = fixture::unit_square({rect(0.4, 0.3, 0.6, 0.7)});
  for (Algorithm a : {Algorithm::Basic, Algorithm::Improved, Algorithm::Backward}) {
    CAPTURE(to_string(a));
    const PlannerConfig cfg = narrow(fixture::config(a, 0.3, 800, 5));
    const BeliefTree t = plan(cfg, env);
    CHECK(worst_cost_gap(t, cfg) <= 1e-9);
    int bad_edges = 0, lossy = 0;
    for (int i = 1; i < static_cast<int>(t.size()); ++i) {
      const int p = t.parent(i);
      const Belief& from = a == Algorithm::Backward ? t.belief(i) : t.belief(p);
      const Belief& to = a == Algorithm::Backward ? t.belief(p) : t.belief(i);
      CHECK(point_collision_free(t.belief(i), env));
      if (!segment_collision_free(from, to.mean, cfg.w, env, cfg.clearance_step)) ++bad_edges;
      if (a == Algorithm::Improved && !is_lossless(from, to, cfg.w, 1e-9)) ++lossy;
      CHECK_FALSE(t.is_ancestor(i, p));
    }
    CHECK(bad_edges == 0);
    CHECK(lossy == 0);
  }
}

TEST_CASE("rewiring only lowers costs and the best goal cost never rises") {
  const Environment env = fixture::unit_square({rect(0.4, 0.3, 0.6, 0.7)});
  for (Algorithm a : {Algorithm::Basic, Algorithm::Improved, Algorithm::Backward}) {
    CAPTURE(to_string(a));
    const PlannerConfig cfg = narrow(fixture::config(a, 0.3, 1000, 21));
    std::vector<double> prev_costs;
    double prev_best = INFINITY;
    int cost_rises = 0, best_rises = 0, audits = 0;
    plan(cfg, env, [&](int, const BeliefTree& t) {
      if (a == Algorithm::Basic || a == Algorithm::Backward) {
        for (std::size_t i = 0; i < prev_costs.size(); ++i)
          if (t.cost(i) > prev_costs[i] + 1e-12) ++cost_rises;
        prev_costs.assign(t.size(), 0.0);
        for (std::size_t i = 0; i < t.size(); ++i) prev_costs[i] = t.cost(i);
      }
      if (a != Algorithm::Backward) {
        const double best = best_goal_cost(t, env);
        if (best > prev_best + 1e-9) ++best_rises;
        prev_best = best;
      }
      ++audits;
    });
    CHECK(audits == cfg.nodes - 1);
    CHECK(cost_rises == 0);
    CHECK(best_rises == 0);
  }
}

TEST_CASE("update_descendants restores losslessness and costs") {
  const ProcessNoise w = ProcessNoise::isotropic(2, 1e-3);
  const double alpha = 0.5;
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    BeliefTree t(Belief{v2(0.1, 0.1), iso(2, 1e-4)}, Orientation::Forward);
    for (int i = 1; i < 30; ++i) {
      const int p = rng() % i;
      const Belief& pb = t.belief(p);
      Belief b{pb.mean + 0.05 * oracle::gaussian_vec(2, rng), oracle::random_spd(2, 1e-5, 3e-3, rng)};
      b.cov = lossless_project(prior_covariance(pb.cov, travel_cost(pb, b), w), b.cov);
      t.add(b, p, t.cost(p) + steering_cost(pb, b, alpha, w).total);
    }
    // Shrink one node's covariance: its subtree is now stale.
    const int k = 1 + rng() % 10;
    t.set_cov(k, 0.5 * t.belief(k).cov);
    update_descendants(t, k, w, alpha);
    for (int i : t.subtree(k)) {
      if (i == k) continue;
      const Belief& pb = t.belief(t.parent(i));
      CHECK(is_lossless(pb, t.belief(i), w, 1e-9));
      CHECK(t.cost(i) == doctest::Approx(t.cost(t.parent(i)) + steering_cost(pb, t.belief(i), alpha, w).total)
                             .epsilon(1e-12));
    }
    // Outside the subtree nothing moves.
    for (int i = 0; i < static_cast<int>(t.size()); ++i)
      if (!t.is_ancestor(k, i) && i != k) CHECK(is_lossless(t.belief(std::max(0, t.parent(i))), t.belief(i), w, 1e-9));
  }
  BeliefTree back(Belief{v2(0, 0), iso(2, 1)}, Orientation::Backward);
  CHECK_THROWS_AS(update_descendants(back, 0, w, alpha), InvalidArgument);
}

TEST_CASE("branch and bound keeps the incumbent and drops dominated nodes") {
  const Environment env = fixture::unit_square();
  const ProcessNoise w = ProcessNoise::isotropic(2, 1e-3);
  BeliefTree t(env.start, Orientation::Forward);
  const int mid = t.add(Belief{v2(0.5, 0.5), iso(2, 1e-4)}, 0, 0.6);
  const int goal = t.add(Belief{v2(0.85, 0.85), iso(2, 1e-4)}, mid, 1.1);
  const int cheap = t.add(Belief{v2(0.6, 0.6), iso(2, 1e-4)}, mid, 0.75);   // could still improve
  const int dear = t.add(Belief{v2(0.2, 0.9), iso(2, 1e-4)}, 0, 1.2);       // already above the bound
  const int far = t.add(Belief{v2(0.05, 0.05), iso(2, 1e-4)}, 0, 0.9);      // cannot reach goal cheaply
  const int dear_kid = t.add(Belief{v2(0.3, 0.9), iso(2, 1e-4)}, dear, 1.3);
  (void)goal, (void)cheap, (void)far, (void)dear_kid;
  branch_and_bound(t, env, 0.0, w);
  CHECK(t.size() == 4);
  const auto best = best_goal_node(t, env);
  REQUIRE(best);
  CHECK(t.cost(*best) == 1.1);
  for (int i = 1; i < static_cast<int>(t.size()); ++i) CHECK(t.parent(i) < static_cast<int>(t.size()));

  BeliefTree none(env.start, Orientation::Forward);
  none.add(Belief{v2(0.5, 0.5), iso(2, 1e-4)}, 0, 5.0);
  branch_and_bound(none, env, 0.0, w);
  CHECK(none.size() == 2);
}

TEST_CASE("improved planner postcondition after pruning") {
  const Environment env = fixture::unit_square();
  PlannerConfig cfg = fixture::config(Algorithm::Improved, 0.3, 1000, 4);
  cfg.bnb_period = 999;  // prune exactly once, at the last iteration
  const BeliefTree t = plan(cfg, env);
  const auto best = best_goal_node(t, env);
  REQUIRE(best);
  const double bound = t.cost(*best);
  std::vector<char> on_path(t.size(), 0);
  for (int k = *best; k >= 0; k = t.parent(k)) on_path[k] = 1;
  for (int i = 0; i < static_cast<int>(t.size()); ++i) {
    if (on_path[i]) continue;
    const Belief& b = t.belief(i);
    const Belief g{env.goal_box.project(b.mean), env.goal_cov};
    CHECK(t.cost(i) < bound);
    CHECK(t.cost(i) + steering_cost(b, g, cfg.alpha, cfg.w).total < bound);
  }
}

TEST_CASE("extract_path") {
  const Environment env = fixture::unit_square();
  const PlannerConfig cfg = fixture::config(Algorithm::Basic, 0.3, 10, 1);
  BeliefTree t(env.start, Orientation::Forward);
  const Belief g{v2(0.85, 0.85), iso(2, 2e-4)};
  const double c = steering_cost(env.start, g, cfg.alpha, cfg.w).total;
  t.add(g, 0, c);
  const PlannedPath p = extract_path(t, env, cfg);
  REQUIRE(p.chain.size() == 2);
  CHECK(p.cost.total == doctest::Approx(c));

  for (Algorithm a : {Algorithm::Basic, Algorithm::Improved, Algorithm::Backward}) {
    const PlannerConfig pc = narrow(fixture::config(a, 0.3, 600, 2));
    const BeliefTree tree = plan(pc, env);
    const PlannedPath path = extract_path(tree, env, pc);
    CHECK(path.cost.total == doctest::Approx(chain_cost(path.chain, pc.alpha, pc.w).total));
    CHECK(path.cost.total == doctest::Approx(path.cost.travel + pc.alpha * path.cost.info));
    CHECK(path.chain.front().mean == env.start.mean);
    CHECK(env.goal_box.contains(path.chain.back().mean));
    if (a != Algorithm::Backward) {
      CHECK(path.cost.total == doctest::Approx(tree.cost(*best_goal_node(tree, env))).epsilon(1e-9));
      for (std::size_t k = 1; k < path.chain.size(); ++k)
        CHECK(dhat(path.chain[k - 1], path.chain[k]) <= pc.ed_min * (1 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("backward planner rejects a colliding goal") {
  Environment env = fixture::unit_square({rect(0.8, 0.8, 0.95, 0.95)});
  CHECK_THROWS_AS(plan_backward(fixture::config(Algorithm::Backward, 0.3, 10, 1), env), PlanningFailure);
}
