#include "infogeo/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "infogeo/errors.hpp"

namespace infogeo {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Basic: return "basic";
    case Algorithm::Improved: return "improved";
    case Algorithm::Backward: return "backward";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "basic") return Algorithm::Basic;
  if (s == "improved") return Algorithm::Improved;
  if (s == "backward") return Algorithm::Backward;
  throw ValidationError("unknown algorithm '" + s + "' (expected basic, improved or backward)");
}

void PlannerConfig::validate(int dim) const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("planner: alpha must be finite and >= 0");
  if (w.dim() != dim) throw ValidationError("planner: process noise W has the wrong dimension");
  if (nodes < 0) throw ValidationError("planner: nodes must be >= 0");
  if (!(ed_min > 0.0)) throw ValidationError("planner: ed_min must be positive");
  if (!(conn_radius > 0.0)) throw ValidationError("planner: conn_radius must be positive");
  cov_bounds.validate(dim);
  if (bnb_period < 1) throw ValidationError("planner: bnb_period must be >= 1");
  if (!(clearance_step > 0.0)) throw ValidationError("planner: clearance_step must be positive");
  if (sensor_map) {
    sensor_map->validate(dim);
    if (algorithm == Algorithm::Improved)
      throw ValidationError("planner: sensor constraints are supported by the basic and backward planners only");
  }
}

// ---------------------------------------------------------------------------
// BeliefTree

BeliefTree::BeliefTree(Belief root, Orientation orientation) : dim_(root.dim()), orientation_(orientation) {
  validate(root);
  add(std::move(root), -1, 0.0);
}

BeliefTree BeliefTree::from_parts(std::vector<Belief> beliefs, const std::vector<int>& parents,
                                  const std::vector<double>& costs, Orientation orientation) {
  const std::size_t n = beliefs.size();
  if (n == 0) throw ValidationError("tree: no nodes");
  if (parents.size() != n || costs.size() != n) throw ValidationError("tree: array lengths differ");
  if (parents[0] != -1) throw ValidationError("tree: node 0 must be the root");
  for (std::size_t i = 1; i < n; ++i)
    if (parents[i] < 0 || static_cast<std::size_t>(parents[i]) >= n || parents[i] == static_cast<int>(i))
      throw ValidationError("tree: node " + std::to_string(i) + " has an invalid parent");
  // Every node must reach the root without revisiting a node.
  std::vector<char> state(n, 0);  // 0 unseen, 1 on stack, 2 reaches root
  state[0] = 2;
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<int> stack;
    int k = static_cast<int>(i);
    while (state[k] == 0) {
      state[k] = 1;
      stack.push_back(k);
      k = parents[k];
    }
    if (state[k] == 1) throw ValidationError("tree: parent links contain a cycle");
    for (int s : stack) state[s] = 2;
  }

  BeliefTree t(beliefs[0], orientation);
  t.cost_[0] = costs[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (beliefs[i].dim() != t.dim_) throw ValidationError("tree: nodes differ in dimension");
    validate(beliefs[i]);
    const Belief& b = beliefs[i];
    t.packed_.insert(t.packed_.end(), b.mean.data(), b.mean.data() + t.dim_);
    for (int r = 0; r < t.dim_; ++r)
      for (int c = 0; c < t.dim_; ++c) t.packed_.push_back(b.cov(r, c));
    t.nodes_.push_back(std::move(beliefs[i]));
    t.parent_.push_back(parents[i]);
    t.cost_.push_back(costs[i]);
    t.children_.emplace_back();
  }
  for (std::size_t i = 1; i < n; ++i) t.children_[parents[i]].push_back(static_cast<int>(i));
  return t;
}

int BeliefTree::add(Belief b, int parent, double cost) {
  if (b.dim() != dim_) throw DimensionMismatch("BeliefTree::add: dimension mismatch");
  const int idx = static_cast<int>(nodes_.size());
  if (parent >= idx || (parent < 0 && idx != 0)) throw InvalidArgument("BeliefTree::add: invalid parent");
  packed_.insert(packed_.end(), b.mean.data(), b.mean.data() + dim_);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) packed_.push_back(b.cov(r, c));
  nodes_.push_back(std::move(b));
  parent_.push_back(parent);
  cost_.push_back(cost);
  children_.emplace_back();
  if (parent >= 0) children_[parent].push_back(idx);
  return idx;
}

void BeliefTree::reparent(int i, int new_parent) {
  if (i == 0) throw InvalidArgument("BeliefTree::reparent: cannot reparent the root");
  if (is_ancestor(i, new_parent)) throw InvalidArgument("BeliefTree::reparent: would create a cycle");
  auto& old = children_[parent_[i]];
  old.erase(std::find(old.begin(), old.end(), i));
  parent_[i] = new_parent;
  children_[new_parent].push_back(i);
}

void BeliefTree::set_cov(int i, Mat cov) {
  const std::size_t stride = dim_ + dim_ * dim_;
  double* p = packed_.data() + i * stride + dim_;
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) *p++ = cov(r, c);
  nodes_[i].cov = std::move(cov);
}

std::vector<int> BeliefTree::subtree(int i) const {
  std::vector<int> out{i};
  for (std::size_t k = 0; k < out.size(); ++k)
    for (int c : children_[out[k]]) out.push_back(c);
  return out;
}

bool BeliefTree::is_ancestor(int a, int i) const {
  for (int k = i; k >= 0; k = parent_[k])
    if (k == a) return true;
  return false;
}

void BeliefTree::prune(const std::vector<char>& remove) {
  const int n = static_cast<int>(size());
  if (static_cast<int>(remove.size()) != n) throw DimensionMismatch("BeliefTree::prune: flag vector size");
  if (remove[0]) throw InvalidArgument("BeliefTree::prune: cannot remove the root");
  std::vector<char> gone(n, 0);
  for (int i = 0; i < n; ++i)
    if (remove[i] && !gone[i])
      for (int k : subtree(i)) gone[k] = 1;

  std::vector<int> remap(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i)
    if (!gone[i]) remap[i] = next++;
  if (next == n) return;

  const std::size_t stride = dim_ + dim_ * dim_;
  std::vector<Belief> nodes;
  std::vector<int> parent;
  std::vector<double> cost, packed;
  std::vector<std::vector<int>> children;
  nodes.reserve(next);
  for (int i = 0; i < n; ++i) {
    if (gone[i]) continue;
    nodes.push_back(std::move(nodes_[i]));
    parent.push_back(parent_[i] < 0 ? -1 : remap[parent_[i]]);
    cost.push_back(cost_[i]);
    std::vector<int> kids;
    for (int c : children_[i])
      if (!gone[c]) kids.push_back(remap[c]);
    children.push_back(std::move(kids));
    packed.insert(packed.end(), packed_.begin() + i * stride, packed_.begin() + (i + 1) * stride);
  }
  nodes_ = std::move(nodes);
  parent_ = std::move(parent);
  cost_ = std::move(cost);
  children_ = std::move(children);
  packed_ = std::move(packed);
}

double BeliefTree::dhat_to(int i, const Belief& b) const {
  const std::size_t stride = dim_ + dim_ * dim_;
  const double* p = packed_.data() + i * stride;
  double dx = 0.0;
  for (int k = 0; k < dim_; ++k) {
    const double t = p[k] - b.mean(k);
    dx += t * t;
  }
  p += dim_;
  double dp = 0.0;
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) {
      const double t = *p++ - b.cov(r, c);
      dp += t * t;
    }
  return std::sqrt(dx) + std::sqrt(dp);
}

// ---------------------------------------------------------------------------
// Metric helpers

double dhat(const Belief& a, const Belief& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("dhat: dimension mismatch");
  return (a.mean - b.mean).norm() + (a.cov - b.cov).norm();
}

int nearest(const BeliefTree& tree, const Belief& b) {
  if (b.dim() != tree.dim()) throw DimensionMismatch("nearest: dimension mismatch");
  int best = 0;
  double best_d = tree.dhat_to(0, b);
  for (int i = 1; i < static_cast<int>(tree.size()); ++i) {
    const double d = tree.dhat_to(i, b);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<int> neighbors(const BeliefTree& tree, const Belief& b, double radius) {
  if (b.dim() != tree.dim()) throw DimensionMismatch("neighbors: dimension mismatch");
  if (!(radius >= 0.0)) throw InvalidArgument("neighbors: radius must be nonnegative");
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(tree.size()); ++i)
    if (tree.dhat_to(i, b) <= radius) out.push_back(i);
  return out;
}

Belief scale(const Belief& near, const Belief& sample, double dhat_min) {
  if (!(dhat_min > 0.0)) throw InvalidArgument("scale: dhat_min must be positive");
  const double d = dhat(sample, near);
  if (d <= dhat_min) return sample;
  const double t = dhat_min / d;
  Belief out{near.mean + t * (sample.mean - near.mean), symmetrize(near.cov + t * (sample.cov - near.cov))};
  require_spd(out.cov, "scale");
  return out;
}

std::optional<Belief> scale_checked(const Belief& near, const Belief& sample, double dhat_min,
                                    const Environment& env) {
  Belief b = scale(near, sample, dhat_min);
  if (!point_collision_free(b, env)) return std::nullopt;
  return b;
}

double connection_radius(std::size_t n, const PlannerConfig& cfg, int dim) {
  if (n < 1) throw InvalidArgument("connection_radius: n must be >= 1");
  if (dim < 1) throw InvalidArgument("connection_radius: dimension must be >= 1");
  if (n == 1) return cfg.ed_min;
  const double nn = static_cast<double>(n);
  return std::min(cfg.ed_min, cfg.conn_radius * std::pow(std::log(nn) / nn, 1.0 / dim));
}

bool in_goal(const Belief& b, const Environment& env) {
  return env.goal_box.contains(b.mean) && psd_leq(b.cov, env.goal_cov, kPsdTol);
}

std::optional<int> best_goal_node(const BeliefTree& tree, const Environment& env) {
  std::optional<int> best;
  for (int i = 0; i < static_cast<int>(tree.size()); ++i) {
    if (best && tree.cost(i) >= tree.cost(*best)) continue;
    if (in_goal(tree.belief(i), env)) best = i;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Planners

namespace {

struct Candidate {
  int node;
  double cost;
};

// Neighbor set for a new belief; `near` is always included even when the
// clipped step lands a rounding error outside the radius.
std::vector<int> neighbor_set(const BeliefTree& tree, const Belief& b, double radius, int near) {
  std::vector<int> nb = neighbors(tree, b, radius);
  if (!std::binary_search(nb.begin(), nb.end(), near)) nb.insert(std::lower_bound(nb.begin(), nb.end(), near), near);
  return nb;
}

// Sorting by candidate cost (stable, so ties keep index order) and taking the
// first feasible entry selects the same parent as scanning all neighbors with
// a strict improvement test, with far fewer collision checks.
template <typename Feasible>
std::optional<Candidate> choose_parent(std::vector<Candidate> cands, Feasible&& feasible) {
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  for (const auto& c : cands)
    if (std::isfinite(c.cost) && feasible(c.node)) return c;
  return std::nullopt;
}

struct Setup {
  int dim;
  Rng rng;
  int iterations;
};

Setup begin(const PlannerConfig& cfg, const Environment& env) {
  env.validate();
  const int d = env.dim();
  cfg.validate(d);
  return {d, Rng(cfg.seed), std::max(0, cfg.nodes - 1)};
}

class Feasibility {
 public:
  Feasibility(const PlannerConfig& cfg, const Environment& env) : cfg_(cfg), env_(env) {}

  // FeasCheck / FeasCheck2
  bool full(const Belief& from, const Belief& to) const {
    if (cfg_.sensor_map) return feas_check2(from, to, *cfg_.sensor_map, env_, cfg_.w, cfg_.clearance_step);
    return feas_check(from, to, env_, cfg_.w, cfg_.clearance_step);
  }
  // ObsCheck
  bool obstacles(const Belief& from, const Belief& to) const {
    return segment_collision_free(from, to.mean, cfg_.w, env_, cfg_.clearance_step);
  }

 private:
  const PlannerConfig& cfg_;
  const Environment& env_;
};

void add_to_subtree(BeliefTree& tree, int i, double delta) {
  for (int k : tree.subtree(i)) tree.set_cost(k, tree.cost(k) + delta);
}

}  // namespace

BeliefTree plan_basic(const PlannerConfig& cfg, const Environment& env, const IterationObserver& observer) {
  Setup s = begin(cfg, env);
  const Feasibility feas(cfg, env);
  auto d = [&](const Belief& a, const Belief& b) { return steering_cost(a, b, cfg.alpha, cfg.w).total; };

  BeliefTree tree(env.start, Orientation::Forward);
  for (int it = 1; it <= s.iterations; ++it) {
    const Belief sample = sample_free_belief(env, cfg.cov_bounds, s.rng);
    const int near = nearest(tree, sample);
    const double radius = connection_radius(tree.size(), cfg, s.dim);
    const auto b_new = scale_checked(tree.belief(near), sample, radius, env);
    if (b_new && feas.full(tree.belief(near), *b_new)) {
      const std::vector<int> nb = neighbor_set(tree, *b_new, radius, near);

      std::vector<Candidate> cands;
      for (int j : nb) cands.push_back({j, tree.cost(j) + d(tree.belief(j), *b_new)});
      const auto parent = choose_parent(cands, [&](int j) { return j == near || feas.full(tree.belief(j), *b_new); });
      if (parent) {
        const int idx = tree.add(*b_new, parent->node, parent->cost);

        for (int j : nb) {
          if (j == parent->node) continue;
          const double c = tree.cost(idx) + d(tree.belief(idx), tree.belief(j));
          if (!(c < tree.cost(j)) || tree.is_ancestor(j, idx)) continue;
          if (!feas.full(tree.belief(idx), tree.belief(j))) continue;
          const double value = c - tree.cost(j);
          tree.reparent(j, idx);
          add_to_subtree(tree, j, value);
        }
      }
    }
    if (observer) observer(it, tree);
  }
  return tree;
}

void update_descendants(BeliefTree& tree, int rewired, const ProcessNoise& w, double alpha) {
  if (tree.orientation() != Orientation::Forward)
    throw InvalidArgument("update_descendants: only defined for forward trees");
  std::vector<int> parents{rewired};
  while (!parents.empty()) {
    std::vector<int> next;
    for (int p : parents)
      for (int c : tree.children(p)) next.push_back(c);
    for (int c : next) {
      const Belief& pb = tree.belief(tree.parent(c));
      const Belief& cb = tree.belief(c);
      const Mat prior = prior_covariance(pb.cov, travel_cost(pb, cb), w);
      tree.set_cov(c, lossless_project(prior, cb.cov));
      tree.set_cost(c, tree.cost(tree.parent(c)) + steering_cost(pb, tree.belief(c), alpha, w).total);
    }
    parents = std::move(next);
  }
}

void branch_and_bound(BeliefTree& tree, const Environment& env, double alpha, const ProcessNoise& w) {
  const auto best = best_goal_node(tree, env);
  if (!best) return;
  const double bound = tree.cost(*best);
  const int n = static_cast<int>(tree.size());

  std::vector<char> keep(n, 0);
  for (int k = *best; k >= 0; k = tree.parent(k)) keep[k] = 1;

  std::vector<char> remove(n, 0);
  for (int i = 0; i < n; ++i) {
    if (keep[i]) continue;
    const Belief& b = tree.belief(i);
    if (tree.cost(i) >= bound) {
      remove[i] = 1;
      continue;
    }
    const Belief goal{env.goal_box.project(b.mean), env.goal_cov};
    const double travel = travel_cost(b, goal);
    if (tree.cost(i) + travel >= bound) {
      remove[i] = 1;
      continue;
    }
    if (tree.cost(i) + steering_cost(b, goal, alpha, w).total >= bound) remove[i] = 1;
  }
  tree.prune(remove);
}

BeliefTree plan_improved(const PlannerConfig& cfg, const Environment& env, const IterationObserver& observer) {
  Setup s = begin(cfg, env);
  const Feasibility feas(cfg, env);
  auto d = [&](const Belief& a, const Belief& b) { return steering_cost(a, b, cfg.alpha, cfg.w).total; };

  BeliefTree tree(env.start, Orientation::Forward);
  for (int it = 1; it <= s.iterations; ++it) {
    const Belief sample = sample_free_belief(env, cfg.cov_bounds, s.rng);
    const int near = nearest(tree, sample);
    const double radius = connection_radius(tree.size(), cfg, s.dim);
    auto b_new = scale_checked(tree.belief(near), sample, radius, env);
    if (b_new && feas.obstacles(tree.belief(near), *b_new)) {
      const std::vector<int> nb = neighbor_set(tree, *b_new, radius, near);

      std::vector<Candidate> cands;
      for (int j : nb) cands.push_back({j, tree.cost(j) + d(tree.belief(j), *b_new)});
      const auto parent =
          choose_parent(cands, [&](int j) { return j == near || feas.obstacles(tree.belief(j), *b_new); });
      if (parent) {
        const Belief& pb = tree.belief(parent->node);
        const Mat prior = prior_covariance(pb.cov, travel_cost(pb, *b_new), cfg.w);
        b_new->cov = lossless_project(prior, b_new->cov);
        const double cost_new = tree.cost(parent->node) + d(pb, *b_new);
        const int idx = tree.add(std::move(*b_new), parent->node, cost_new);

        for (int j : nb) {
          if (j == parent->node) continue;
          const double c = tree.cost(idx) + d(tree.belief(idx), tree.belief(j));
          if (!(c < tree.cost(j)) || tree.is_ancestor(j, idx)) continue;
          if (!feas.obstacles(tree.belief(idx), tree.belief(j))) continue;
          const Belief& nbw = tree.belief(idx);
          const Mat prior_j = prior_covariance(nbw.cov, travel_cost(nbw, tree.belief(j)), cfg.w);
          tree.set_cov(j, lossless_project(prior_j, tree.belief(j).cov));
          tree.reparent(j, idx);
          tree.set_cost(j, tree.cost(idx) + d(tree.belief(idx), tree.belief(j)));
          update_descendants(tree, j, cfg.w, cfg.alpha);
        }
      }
    }
    if (it % cfg.bnb_period == 0) branch_and_bound(tree, env, cfg.alpha, cfg.w);
    if (observer) observer(it, tree);
  }
  return tree;
}

BeliefTree plan_backward(const PlannerConfig& cfg, const Environment& env, const IterationObserver& observer) {
  Setup s = begin(cfg, env);
  const Feasibility feas(cfg, env);
  auto d = [&](const Belief& a, const Belief& b) { return steering_cost(a, b, cfg.alpha, cfg.w).total; };

  Belief goal{env.goal_box.center(), env.goal_cov};
  if (!point_collision_free(goal, env)) throw PlanningFailure("backward planner: the goal belief is not collision free");

  BeliefTree tree(std::move(goal), Orientation::Backward);
  for (int it = 1; it <= s.iterations; ++it) {
    const Belief sample = sample_free_belief(env, cfg.cov_bounds, s.rng);
    const int near = nearest(tree, sample);
    const double radius = connection_radius(tree.size(), cfg, s.dim);
    const auto b_new = scale_checked(tree.belief(near), sample, radius, env);
    if (b_new && feas.full(*b_new, tree.belief(near))) {
      const std::vector<int> nb = neighbor_set(tree, *b_new, radius, near);

      std::vector<Candidate> cands;
      for (int j : nb) cands.push_back({j, tree.cost(j) + d(*b_new, tree.belief(j))});
      const auto parent = choose_parent(cands, [&](int j) { return j == near || feas.full(*b_new, tree.belief(j)); });
      if (parent) {
        const int idx = tree.add(*b_new, parent->node, parent->cost);

        for (int j : nb) {
          if (j == parent->node || j == 0) continue;
          const double c = tree.cost(idx) + d(tree.belief(j), tree.belief(idx));
          if (!(c < tree.cost(j)) || tree.is_ancestor(j, idx)) continue;
          if (!feas.full(tree.belief(j), tree.belief(idx))) continue;
          const double value = c - tree.cost(j);
          tree.reparent(j, idx);
          add_to_subtree(tree, j, value);
        }
      }
    }
    if (observer) observer(it, tree);
  }
  return tree;
}

BeliefTree plan(const PlannerConfig& cfg, const Environment& env, const IterationObserver& observer) {
  switch (cfg.algorithm) {
    case Algorithm::Basic: return plan_basic(cfg, env, observer);
    case Algorithm::Improved: return plan_improved(cfg, env, observer);
    case Algorithm::Backward: return plan_backward(cfg, env, observer);
  }
  throw InvalidArgument("plan: unknown algorithm");
}

PlannedPath extract_path(const BeliefTree& tree, const Environment& env, const PlannerConfig& cfg) {
  PlannedPath out;
  if (tree.orientation() == Orientation::Forward) {
    const auto best = best_goal_node(tree, env);
    if (!best) throw PlanningFailure("no tree node reaches the goal region");
    for (int k = *best; k >= 0; k = tree.parent(k)) out.chain.push_back(tree.belief(k));
    std::reverse(out.chain.begin(), out.chain.end());
  } else {
    const Feasibility feas(cfg, env);
    std::vector<Candidate> cands;
    for (int i = 0; i < static_cast<int>(tree.size()); ++i)
      cands.push_back({i, steering_cost(env.start, tree.belief(i), cfg.alpha, cfg.w).total + tree.cost(i)});
    const auto entry = choose_parent(cands, [&](int i) { return feas.full(env.start, tree.belief(i)); });
    if (!entry) throw PlanningFailure("the start belief cannot be connected to the backward tree");
    out.chain.push_back(env.start);
    for (int k = entry->node; k >= 0; k = tree.parent(k)) out.chain.push_back(tree.belief(k));
  }
  out.cost = chain_cost(out.chain, cfg.alpha, cfg.w);
  return out;
}

}  // namespace infogeo
