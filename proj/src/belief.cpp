#include "infogeo/belief.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infogeo/errors.hpp"

namespace infogeo {

namespace {

void require_same_dim(const Belief& a, const Belief& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch(std::string(what) + ": belief dimensions differ (" + std::to_string(a.dim()) +
                            " vs " + std::to_string(b.dim()) + ")");
  }
}

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch(std::string(what) + ": matrix shapes differ");
}

struct Projection {
  Mat q;
  Vec sigma;  // eigenvalues of post^{-1/2} prior post^{-1/2}
};

Projection project(const Mat& prior, const Mat& post) {
  require_same_shape(prior, post, "lossless_project");
  if (prior.rows() != prior.cols() || prior.size() == 0) throw DimensionMismatch("lossless_project: not square");
  if (!prior.allFinite() || !post.allFinite()) throw NotPositiveDefinite("lossless_project: non-finite input");
  if (asymmetry(prior) > kSymTol || asymmetry(post) > kSymTol)
    throw NotPositiveDefinite("lossless_project: input is not symmetric");

  // PD of post shows in its spectrum, PD of prior in the congruent `rel`.
  const SymEig post_eig = sym_eig(post);
  if (!(post_eig.values(0) > 0.0)) throw NotPositiveDefinite("lossless_project: posterior is not positive definite");
  const Vec root = post_eig.values.cwiseSqrt();
  const Mat post_sqrt = post_eig.vectors * root.asDiagonal() * post_eig.vectors.transpose();
  const Mat post_inv_sqrt = post_eig.vectors * root.cwiseInverse().asDiagonal() * post_eig.vectors.transpose();

  const SymEig rel = sym_eig(post_inv_sqrt * symmetrize(prior) * post_inv_sqrt);
  if (!(rel.values(0) > 0.0)) throw NotPositiveDefinite("lossless_project: prior is not positive definite");
  const Vec capped = rel.values.cwiseMin(1.0);
  Mat q = post_sqrt * rel.vectors * capped.asDiagonal() * rel.vectors.transpose() * post_sqrt;
  return {symmetrize(q), rel.values};
}

}  // namespace

Belief Belief::make(Vec mean, Mat cov) {
  Belief b{std::move(mean), std::move(cov)};
  validate(b);
  return b;
}

void validate(const Belief& b) {
  if (b.mean.size() == 0) throw DimensionMismatch("belief: empty mean");
  if (b.cov.rows() != b.mean.size() || b.cov.cols() != b.mean.size())
    throw DimensionMismatch("belief: covariance shape does not match mean dimension");
  if (!b.mean.allFinite()) throw InvalidArgument("belief: non-finite mean");
  require_spd(b.cov, "belief covariance");
}

ProcessNoise::ProcessNoise(Mat w) : w_(std::move(w)) {
  if (w_.rows() != w_.cols() || w_.size() == 0) throw DimensionMismatch("process noise: W must be square");
  if (!w_.allFinite() || asymmetry(w_) > kSymTol) throw InvalidArgument("process noise: W must be symmetric");
  w_ = symmetrize(w_);
  if (min_eigenvalue(w_) < -kPsdTol) throw InvalidArgument("process noise: W must be positive semidefinite");
  spectral_norm_ = spectral_norm_sym(w_);
}

ProcessNoise ProcessNoise::isotropic(int dim, double intensity) {
  return ProcessNoise(intensity * Mat::Identity(dim, dim));
}

double travel_cost(const Belief& from, const Belief& to) {
  require_same_dim(from, to, "travel_cost");
  return (to.mean - from.mean).norm();
}

Mat prior_covariance(const Mat& cov_from, double dist, const ProcessNoise& w) {
  if (!(dist >= 0.0)) throw InvalidArgument("prior_covariance: negative travel distance");
  require_same_shape(cov_from, w.matrix(), "prior_covariance");
  if (dist < kZeroTravel) return cov_from;
  return cov_from + dist * w.matrix();
}

Mat lossless_project(const Mat& prior, const Mat& post) { return project(prior, post).q; }

double info_cost(const Mat& prior, const Mat& post) {
  // ½(log det prior − log det Q*) = ½ Σ log max(1, σ_i)
  const Projection p = project(prior, post);
  if (prior == post) return 0.0;  // exact zero on the diagonal, not rounding noise
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.sigma.size(); ++i) acc += std::log(std::max(1.0, p.sigma(i)));
  return 0.5 * acc;
}

CostBreakdown steering_cost(const Belief& from, const Belief& to, double alpha, const ProcessNoise& w) {
  if (!(alpha >= 0.0)) throw InvalidArgument("steering_cost: alpha must be nonnegative");
  CostBreakdown c;
  c.travel = travel_cost(from, to);
  c.info = info_cost(prior_covariance(from.cov, c.travel, w), to.cov);
  c.total = c.travel + alpha * c.info;
  return c;
}

bool is_lossless(const Belief& from, const Belief& to, const ProcessNoise& w, double tol) {
  const double dist = travel_cost(from, to);
  return psd_leq(to.cov, prior_covariance(from.cov, dist, w), tol);
}

CostBreakdown chain_cost(const BeliefChain& chain, double alpha, const ProcessNoise& w) {
  if (chain.empty()) throw InvalidArgument("chain_cost: empty chain");
  CostBreakdown sum;
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) sum += steering_cost(chain[k], chain[k + 1], alpha, w);
  return sum;
}

BeliefChain chain_lossless_modify(const BeliefChain& chain, const ProcessNoise& w) {
  if (chain.size() < 2) throw InvalidArgument("chain_lossless_modify: chain needs at least two nodes");
  BeliefChain out = chain;
  for (std::size_t k = 1; k < out.size(); ++k) {
    require_same_dim(out[k - 1], out[k], "chain_lossless_modify");
    const Mat prior = prior_covariance(out[k - 1].cov, travel_cost(out[k - 1], out[k]), w);
    out[k].cov = lossless_project(prior, out[k].cov);
  }
  return out;
}

double chain_total_variation(const BeliefChain& a, const BeliefChain& b, const ProcessNoise& w) {
  if (a.size() != b.size()) throw DimensionMismatch("chain_total_variation: chains differ in length");
  if (a.empty()) return 0.0;
  const double sw = w.spectral_norm();
  auto dx = [&](std::size_t k) -> Vec {
    require_same_dim(a[k], b[k], "chain_total_variation");
    return a[k].mean - b[k].mean;
  };
  auto dp = [&](std::size_t k) -> Mat { return a[k].cov - b[k].cov; };

  double v = dx(0).norm() * sw + spectral_norm_sym(dp(0));
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    v += (dx(k + 1) - dx(k)).norm() * sw;
    v += spectral_norm_sym(dp(k + 1) - dp(k));
  }
  return v;
}

}  // namespace infogeo
