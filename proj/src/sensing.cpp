#include "infogeo/sensing.hpp"

#include <string>

#include "infogeo/errors.hpp"

namespace infogeo {

Mat SensorModel::information() const {
  const Eigen::LLT<Mat> llt(symmetrize(v));
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("sensor: V is not positive definite");
  return symmetrize(c.transpose() * llt.solve(c));
}

void SensorModel::validate(int dim) const {
  if (c.cols() != dim) throw DimensionMismatch("sensor: C must have " + std::to_string(dim) + " columns");
  if (v.rows() != c.rows() || v.cols() != c.rows()) throw DimensionMismatch("sensor: V must be m×m with m = rows(C)");
  if (!c.allFinite()) throw InvalidArgument("sensor: non-finite C");
  require_spd(v, "sensor V");
}

const std::optional<SensorModel>& SensorMap::lookup(const Vec& x) const {
  for (const auto& r : regions)
    if (r.box.contains(x)) return r.sensor;
  return fallback;
}

void SensorMap::validate(int dim) const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    if (r.box.dim() != dim || r.box.max.size() != dim)
      throw DimensionMismatch("sensor map: region " + std::to_string(i) + " has the wrong dimension");
    if (r.sensor) r.sensor->validate(dim);
  }
  if (fallback) fallback->validate(dim);
}

SynthesizedSensor synthesize_sensor(const Mat& prior, const Mat& post) {
  if (prior.rows() != post.rows() || prior.cols() != post.cols())
    throw DimensionMismatch("synthesize_sensor: shapes differ");
  require_spd(prior, "synthesize_sensor prior");
  require_spd(post, "synthesize_sensor post");
  if (!psd_leq(post, prior, kPsdTol))
    throw InvalidArgument("synthesize_sensor: posterior is not dominated by the prior (transition is not lossless)");

  Mat m = symmetrize(spd_inverse(post) - spd_inverse(prior));
  // Clip roundoff-level negative eigenvalues so that M^{1/2} exists.
  const SymEig e = sym_eig(m);
  const Vec lam = e.values.cwiseMax(0.0);
  m = symmetrize(e.vectors * lam.asDiagonal() * e.vectors.transpose());
  const Mat c = symmetrize(e.vectors * lam.cwiseSqrt().asDiagonal() * e.vectors.transpose());
  const int d = static_cast<int>(prior.rows());
  return {m, SensorModel{c, Mat::Identity(d, d)}};
}

Mat constrained_posterior(const Mat& prior, const SensorModel& sensor) {
  sensor.validate(static_cast<int>(prior.rows()));
  require_spd(prior, "constrained_posterior prior");
  return spd_inverse(spd_inverse(prior) + sensor.information());
}

bool feas_check(const Belief& from, const Belief& to, const Environment& env, const ProcessNoise& w,
                double clearance_step) {
  return is_lossless(from, to, w) && point_collision_free(to, env) &&
         segment_collision_free(from, to.mean, w, env, clearance_step);
}

bool feas_check2(const Belief& from, const Belief& to, const SensorMap& map, const Environment& env,
                 const ProcessNoise& w, double clearance_step) {
  if (!is_lossless(from, to, w)) return false;
  const Mat prior = prior_covariance(from.cov, travel_cost(from, to), w);
  const auto& sensor = map.lookup(to.mean);
  const Mat reachable = sensor ? constrained_posterior(prior, *sensor) : prior;
  if (!psd_leq(reachable, to.cov, kPsdTol)) return false;
  return point_collision_free(to, env) && segment_collision_free(from, to.mean, w, env, clearance_step);
}

}  // namespace infogeo
