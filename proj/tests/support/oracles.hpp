#pragma once

// Independent reference computations used by the unit, property and
// acceptance tests. None of them call the routine they are checking.

#include <vector>

#include "infogeo/belief.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/planner.hpp"
#include "infogeo/sensing.hpp"

namespace oracle {

using infogeo::Belief;
using infogeo::BeliefChain;
using infogeo::Mat;
using infogeo::Rng;
using infogeo::Vec;

double uniform(Rng& rng, double lo, double hi);
Vec gaussian_vec(int d, Rng& rng);
/// Haar-random orthogonal matrix (QR of a Gaussian matrix with sign fix).
Mat random_rotation(int d, Rng& rng);
/// Eigenvalues log-uniform in [lo, hi], random orientation.
Mat random_spd(int d, double lo, double hi, Rng& rng);
Mat random_sym(int d, Rng& rng);

/// Interior-point (log-barrier Newton) solution of
///   max log det Q  s.t.  0 ≺ Q ⪯ a, Q ⪯ b.
Mat maxdet(const Mat& a, const Mat& b);
/// ½ (log det prior − log det maxdet(prior, post))
double info_cost(const Mat& prior, const Mat& post);

/// Mahalanobis distance² to a convex polygon/polyhedron from dense sampling of
/// its boundary; 0 when the center lies inside.
double mahalanobis_sampled(const Vec& center, const Mat& cov, const std::vector<Vec>& hull_vertices,
                           const std::vector<std::vector<int>>& facets, int samples = 10000);

/// Minimum over a uniform λ grid of the clearance ratio
/// min_mahalanobis(x[λ], P[λ]) / χ² along a travel segment.
double segment_min_ratio(const Belief& from, const Vec& to_mean, const infogeo::ProcessNoise& w,
                         const infogeo::Environment& env, int grid = 100000);

/// max over sampled boundary points of the inner χ² ellipsoid of their
/// squared Mahalanobis distance to the outer center, divided by χ².
/// Containment ⇔ result <= 1 (up to sampling).
double containment_ratio(const Belief& inner, const Belief& outer, double chi2, int samples = 20000);

/// Kalman-gain form of the measurement update.
Mat kalman_update(const Mat& prior, const Mat& c, const Mat& v);

/// Shortest obstacle-avoiding path length in the plane from `start` to the
/// nearest point of `goal`, on the visibility graph of convex polygons.
double visibility_shortest_path(const Vec& start, const infogeo::Box& goal, const std::vector<std::vector<Vec>>& polygons);

/// The variation sum written out term by term.
double total_variation(const BeliefChain& a, const BeliefChain& b, const Mat& w);

}  // namespace oracle
