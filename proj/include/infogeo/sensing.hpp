#pragma once

// Sensors implied by planned covariance transitions, and sensor-limited
// feasibility of transitions.

#include <optional>
#include <vector>

#include "infogeo/belief.hpp"
#include "infogeo/geometry.hpp"

namespace infogeo {

/// Linear sensor y = C x + v, v ~ N(0, V).
struct SensorModel {
  Mat c;  // m×d
  Mat v;  // m×m, SPD

  /// CᵀV⁻¹C (d×d, PSD)
  Mat information() const;
  void validate(int dim) const;
};

struct SensorRegion {
  Box box;
  std::optional<SensorModel> sensor;  // nullopt: no measurement available
};

/// First matching region wins; otherwise the default (which may be none).
struct SensorMap {
  std::vector<SensorRegion> regions;
  std::optional<SensorModel> fallback;

  const std::optional<SensorModel>& lookup(const Vec& x) const;
  void validate(int dim) const;
};

/// Information matrix M = P_post⁻¹ − P_prior⁻¹ of the sensor realizing the
/// transition, with its symmetric factor C = M^{1/2} (V = I).
struct SynthesizedSensor {
  Mat information;
  SensorModel model;
};

/// Throws InvalidArgument if P_post is not dominated by P_prior.
SynthesizedSensor synthesize_sensor(const Mat& prior, const Mat& post);

/// Kalman update of `prior` with `sensor`: (P⁻¹ + CᵀV⁻¹C)⁻¹.
Mat constrained_posterior(const Mat& prior, const SensorModel& sensor);

/// Lossless, obstacle-free segment.
bool feas_check(const Belief& from, const Belief& to, const Environment& env, const ProcessNoise& w,
                double clearance_step = 0.01);

/// feas_check and to.cov ⪰ P̃, where P̃ is the posterior reachable with the
/// sensor available at to.mean (the travel prior itself where there is none).
bool feas_check2(const Belief& from, const Belief& to, const SensorMap& map, const Environment& env,
                 const ProcessNoise& w, double clearance_step = 0.01);

}  // namespace infogeo
