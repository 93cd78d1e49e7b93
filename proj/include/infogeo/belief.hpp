#pragma once

// Information-geometric steering cost on the Gaussian belief space.
//
// A belief b = (x, P) is a mean and an SPD covariance. Steering b1 -> b2 costs
//
//   D(b1, b2) = ‖x2 - x1‖ + α · D_info
//
// where D_info is the entropy reduction needed to shrink the travel prior
// P1 + ‖x2 - x1‖·W down to (the max-det lower cap of) P2. D is a
// quasi-pseudometric: nonnegative, zero on the diagonal, triangle inequality,
// but asymmetric.

#include <vector>

#include "infogeo/linalg.hpp"

namespace infogeo {

struct Belief {
  Vec mean;
  Mat cov;

  int dim() const { return static_cast<int>(mean.size()); }

  /// Validating constructor: dimensions agree, cov symmetric (kSymTol) and PD.
  static Belief make(Vec mean, Mat cov);
};

/// Throws DimensionMismatch / NotPositiveDefinite.
void validate(const Belief& b);

/// Process noise intensity W (covariance growth per unit travelled).
class ProcessNoise {
 public:
  ProcessNoise() = default;
  explicit ProcessNoise(Mat w);
  static ProcessNoise isotropic(int dim, double intensity);

  const Mat& matrix() const { return w_; }
  int dim() const { return static_cast<int>(w_.rows()); }
  /// σ̄(W)
  double spectral_norm() const { return spectral_norm_; }

 private:
  Mat w_;
  double spectral_norm_ = 0.0;
};

/// Ordered beliefs b_0 … b_K (K + 1 >= 1 nodes, common dimension).
using BeliefChain = std::vector<Belief>;

struct CostBreakdown {
  double travel = 0.0;
  double info = 0.0;
  double total = 0.0;

  CostBreakdown& operator+=(const CostBreakdown& o) {
    travel += o.travel;
    info += o.info;
    total += o.total;
    return *this;
  }
};

double travel_cost(const Belief& from, const Belief& to);

/// P_from + dist·W
Mat prior_covariance(const Mat& cov_from, double dist, const ProcessNoise& w);

/// Max-det solution Q* of  max log det Q  s.t.  Q ⪯ prior, Q ⪯ post,
/// computed in closed form through the eigen-decomposition of
/// post^{-1/2} · prior · post^{-1/2}.
Mat lossless_project(const Mat& prior, const Mat& post);

/// ½ (log det prior − log det Q*) >= 0.
double info_cost(const Mat& prior, const Mat& post);

CostBreakdown steering_cost(const Belief& from, const Belief& to, double alpha, const ProcessNoise& w);

/// to.cov ⪯ prior_covariance(from.cov, ‖Δx‖, W) + tol·I
bool is_lossless(const Belief& from, const Belief& to, const ProcessNoise& w, double tol = kPsdTol);

/// Componentwise sum of steering costs over consecutive pairs.
CostBreakdown chain_cost(const BeliefChain& chain, double alpha, const ProcessNoise& w);

/// Keeps the means and shrinks each covariance, front to back, onto the
/// lossless projection against its predecessor's travel prior. The result is
/// lossless and never longer than the input.
BeliefChain chain_lossless_modify(const BeliefChain& chain, const ProcessNoise& w);

/// Total variation of the difference chain (a − b) over the index partition:
///   ‖Δx_0‖σ̄(W) + σ̄(ΔP_0) + Σ_k ‖Δx_{k+1} − Δx_k‖σ̄(W) + σ̄(ΔP_{k+1} − ΔP_k)
double chain_total_variation(const BeliefChain& a, const BeliefChain& b, const ProcessNoise& w);

}  // namespace infogeo
