#pragma once

// Convex obstacles and χ²-confidence collision predicates.
//
// A belief (x, P) is clear of an obstacle O when every point o ∈ O satisfies
// (x − o)ᵀ P⁻¹ (x − o) >= χ². The workspace bounds act as obstacles too (one
// half-space wall per face of the box).

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "infogeo/belief.hpp"

namespace infogeo {

using Rng = std::mt19937_64;

/// Axis-aligned box [min, max].
struct Box {
  Vec min;
  Vec max;

  int dim() const { return static_cast<int>(min.size()); }
  bool contains(const Vec& p, double tol = 0.0) const;
  /// Euclidean projection onto the box.
  Vec project(const Vec& p) const;
  Vec center() const { return 0.5 * (min + max); }
  bool within(const Box& outer) const;
};

/// Convex polytope given by its vertices. Redundant vertices (on or inside
/// the hull of the others) are dropped at construction. Supported for
/// d ∈ {1, 2, 3}; in 2-D the kept vertices are stored counterclockwise.
class ConvexObstacle {
 public:
  explicit ConvexObstacle(std::vector<Vec> vertices);

  int dim() const { return dim_; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  /// Boundary pieces as vertex-index tuples: endpoints (1-D), edges (2-D),
  /// triangles covering every face (3-D).
  const std::vector<std::vector<int>>& facets() const { return facets_; }

  bool contains(const Vec& p) const;
  /// Smallest ball enclosing the vertices (not minimal, just enclosing).
  const Vec& bounding_center() const { return bound_center_; }
  double bounding_radius() const { return bound_radius_; }

 private:
  struct HalfSpace {
    Vec normal;  // outward
    double offset;
  };

  int dim_ = 0;
  std::vector<Vec> vertices_;
  std::vector<std::vector<int>> facets_;
  std::vector<HalfSpace> halfspaces_;
  Vec bound_center_;
  double bound_radius_ = 0.0;
  double eps_ = 0.0;
};

struct Environment {
  Box bounds;
  std::vector<ConvexObstacle> obstacles;
  Belief start;
  Box goal_box;
  Mat goal_cov;
  double chi2 = 0.0;

  int dim() const { return bounds.dim(); }
  /// Throws ValidationError on any violated invariant.
  void validate() const;
  /// Outside the workspace or inside some obstacle.
  bool point_blocked(const Vec& x) const;
};

/// Eigenvalue bounds for sampled covariances: λ_min >= rho, tr P <= trace_max.
struct CovSampleBounds {
  double rho = 0.0;
  double trace_max = 0.0;
  void validate(int dim) const;
};

/// χ² quantile for `dof` degrees of freedom at the given confidence level.
double chi2_quantile(int dof, double confidence);

/// min over o ∈ obstacle of (center − o)ᵀ cov⁻¹ (center − o); 0 iff inside.
double min_mahalanobis(const Vec& center, const Mat& cov, const ConvexObstacle& obstacle);

/// Smallest squared Mahalanobis distance to any obstacle or workspace wall.
/// Exact whenever the true value is below `cap`; otherwise the result is some
/// value >= cap.
double min_mahalanobis(const Vec& center, const Mat& cov, const Environment& env,
                       double cap = std::numeric_limits<double>::infinity());

bool point_collision_free(const Belief& b, const Environment& env);

/// Conservative check of the travel segment from `from.mean` to `to_mean`
/// with covariance growing as from.cov + λ‖Δx‖W. A `true` answer is a
/// guarantee; grazing cases may be reported as collisions.
bool segment_collision_free(const Belief& from, const Vec& to_mean, const ProcessNoise& w,
                            const Environment& env, double clearance_step = 0.01);

/// χ²-ellipsoid of `inner` ⊆ χ²-ellipsoid of `outer`, decided exactly by the
/// S-procedure.
bool ellipsoid_contained(const Belief& inner, const Belief& outer, double chi2);

/// Random SPD matrix with eigenvalues i.i.d. U[rho, trace_max/d] and a
/// uniformly random orientation.
Mat sample_covariance(int dim, const CovSampleBounds& bounds, Rng& rng);

/// Uniform mean in the workspace plus sampled covariance, rejected until the
/// belief is collision free. Throws SamplingBudgetExhausted.
Belief sample_free_belief(const Environment& env, const CovSampleBounds& bounds, Rng& rng,
                          int max_attempts = 10000);

}  // namespace infogeo
