#pragma once

// RRT* over Gaussian beliefs under the steering cost D.
//
// Three variants share the sampling machinery:
//   basic     every edge must be lossless and obstacle free when inserted
//   improved  only obstacle checks; covariances are projected to make edges
//             lossless, rewires re-project whole subtrees, and the tree is
//             pruned by branch-and-bound
//   backward  rooted at the goal; edges point from a node to its parent and
//             cost() is the cost-to-go

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "infogeo/belief.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/sensing.hpp"

namespace infogeo {

enum class Algorithm { Basic, Improved, Backward };
enum class Orientation { Forward, Backward };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct PlannerConfig {
  Algorithm algorithm = Algorithm::Improved;
  double alpha = 0.0;
  ProcessNoise w;
  int nodes = 1000;  // N: the root counts as the first node, so N − 1 samples are drawn
  double ed_min = 0.1;
  double conn_radius = 1.0;
  CovSampleBounds cov_bounds;
  std::uint64_t seed = 0;
  int bnb_period = 100;
  double clearance_step = 0.01;
  std::optional<SensorMap> sensor_map;

  void validate(int dim) const;
};

/// Rooted tree of beliefs. Node 0 is the root. In forward orientation the
/// edge is parent → node and cost is cost-to-come; in backward orientation
/// the edge is node → parent and cost is cost-to-go.
class BeliefTree {
 public:
  BeliefTree(Belief root, Orientation orientation);
  /// Rebuilds a tree from per-node arrays (node 0 is the root, parents[0] = -1).
  /// Throws ValidationError on a malformed parent structure.
  static BeliefTree from_parts(std::vector<Belief> beliefs, const std::vector<int>& parents,
                               const std::vector<double>& costs, Orientation orientation);

  std::size_t size() const { return nodes_.size(); }
  int dim() const { return dim_; }
  Orientation orientation() const { return orientation_; }
  const Belief& belief(int i) const { return nodes_[i]; }
  int parent(int i) const { return parent_[i]; }  // -1 at the root
  double cost(int i) const { return cost_[i]; }
  const std::vector<int>& children(int i) const { return children_[i]; }

  int add(Belief b, int parent, double cost);
  void reparent(int i, int new_parent);
  void set_cost(int i, double c) { cost_[i] = c; }
  void set_cov(int i, Mat cov);
  /// Breadth-first order, starting at i.
  std::vector<int> subtree(int i) const;
  bool is_ancestor(int a, int i) const;
  /// Drops every flagged node together with its subtree and renumbers the
  /// survivors in their original order. The root cannot be removed.
  void prune(const std::vector<char>& remove);

  double dhat_to(int i, const Belief& b) const;

 private:
  int dim_;
  Orientation orientation_;
  std::vector<Belief> nodes_;
  std::vector<int> parent_;
  std::vector<double> cost_;
  std::vector<std::vector<int>> children_;
  std::vector<double> packed_;  // per node: mean, then covariance row-major
};

/// D̂(a, b) = ‖x_a − x_b‖ + ‖P_a − P_b‖_F
double dhat(const Belief& a, const Belief& b);

/// Index minimizing D̂; lowest index on ties.
int nearest(const BeliefTree& tree, const Belief& b);
/// All indices with D̂ <= radius, ascending.
std::vector<int> neighbors(const BeliefTree& tree, const Belief& b, double radius);
/// Linear move from `near` toward `sample` by at most D̂ = dhat_min.
Belief scale(const Belief& near, const Belief& sample, double dhat_min);
/// scale() followed by the point clearance check; nullopt when the result collides.
std::optional<Belief> scale_checked(const Belief& near, const Belief& sample, double dhat_min,
                                    const Environment& env);
/// min{ed_min, r (log n / n)^{1/d}}, ed_min at n = 1.
double connection_radius(std::size_t n, const PlannerConfig& cfg, int dim);

/// mean in the goal box and cov ⪯ goal_cov + psdTol·I
bool in_goal(const Belief& b, const Environment& env);
/// Cheapest goal-region node of a forward tree.
std::optional<int> best_goal_node(const BeliefTree& tree, const Environment& env);

/// Called after every iteration with the 1-based iteration index.
using IterationObserver = std::function<void(int, const BeliefTree&)>;

BeliefTree plan_basic(const PlannerConfig& cfg, const Environment& env, const IterationObserver& observer = {});
BeliefTree plan_improved(const PlannerConfig& cfg, const Environment& env, const IterationObserver& observer = {});
BeliefTree plan_backward(const PlannerConfig& cfg, const Environment& env, const IterationObserver& observer = {});
/// Dispatches on cfg.algorithm.
BeliefTree plan(const PlannerConfig& cfg, const Environment& env, const IterationObserver& observer = {});

/// Re-projects every descendant of `rewired` onto its parent's travel prior,
/// breadth first, and recomputes their costs.
void update_descendants(BeliefTree& tree, int rewired, const ProcessNoise& w, double alpha);

/// Removes nodes whose cost plus the obstacle-free lower bound to the goal
/// reaches the incumbent goal cost. Nodes on the incumbent path are kept.
void branch_and_bound(BeliefTree& tree, const Environment& env, double alpha, const ProcessNoise& w);

struct PlannedPath {
  BeliefChain chain;  // start → goal
  CostBreakdown cost;
};

/// Cheapest start → goal chain. A backward tree is entered from the start
/// belief through the cheapest feasible first edge. Throws PlanningFailure.
PlannedPath extract_path(const BeliefTree& tree, const Environment& env, const PlannerConfig& cfg);

}  // namespace infogeo
