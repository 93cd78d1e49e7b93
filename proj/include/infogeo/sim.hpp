#pragma once

// Path following with event-triggered sensing. The robot measures only when
// its estimate's χ² ellipse leaves the planned ellipse of the reference.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "infogeo/belief.hpp"
#include "infogeo/geometry.hpp"

namespace infogeo {

struct ReferenceSample {
  Vec mean;
  Mat cov;
  double time = 0.0;
};

struct ReferenceTrajectory {
  std::vector<ReferenceSample> samples;
};

/// Samples the chain every speed·dt of arc length. Along an edge the
/// covariance is the travel prior P_k + s·W; it drops to the planned posterior
/// once the waypoint is passed. The last sample is the chain's last belief.
ReferenceTrajectory discretize_reference(const BeliefChain& chain, double speed, double dt, const ProcessNoise& w);

enum class VehicleKind { SingleIntegrator, DoubleIntegrator };

std::string to_string(VehicleKind k);
VehicleKind vehicle_kind_from_string(const std::string& s);

struct VehicleModel {
  VehicleKind kind = VehicleKind::SingleIntegrator;
  double dt = 5e-4;
  double speed = 0.1;  // nominal, used to discretize the plan
  Mat w;               // process noise intensity per second: w_k ~ N(0, dt·W); full state
  Mat v;               // measurement noise covariance (position only)
  double q_weight = 1.0;  // LQ tracker: Q = q·I
  double r_weight = 0.1;  //            R = r·I

  /// State dimension for a plan of dimension d.
  int state_dim(int plan_dim) const;
  void validate(int plan_dim) const;
};

struct SimStep {
  Vec state;
  Vec est_mean;
  Mat est_cov;
  Vec ref_mean;
  Mat ref_cov;
  bool measured = false;
};

struct SimulationTrace {
  std::vector<SimStep> steps;  // index k: after the move to reference sample k (k >= 1)
  int measurement_count = 0;
  bool collided = false;
};

/// Measure iff the estimate's ellipse is not inside the reference ellipse.
bool event_trigger(const Belief& estimate, const Belief& reference, double chi2);

/// `env` is optional; when given, a true state outside the workspace or
/// inside an obstacle sets `collided`. With record_steps = false only the
/// counters are kept.
SimulationTrace simulate_single_integrator(const ReferenceTrajectory& ref, const VehicleModel& model, double chi2,
                                           Rng& rng, const Environment* env = nullptr, bool record_steps = true);
SimulationTrace simulate_double_integrator(const ReferenceTrajectory& ref, const VehicleModel& model, double chi2,
                                           Rng& rng, const Environment* env = nullptr, bool record_steps = true);
SimulationTrace simulate(const ReferenceTrajectory& ref, const VehicleModel& model, double chi2, Rng& rng,
                         const Environment* env = nullptr, bool record_steps = true);

struct MonteCarloStats {
  int runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (0 for one run)
  std::map<int, int> histogram;  // measurement count -> number of runs
  double collision_rate = 0.0;
  std::vector<int> counts;  // per run, in run order
};

/// Run i uses an rng seeded from (seed, i), so results do not depend on the
/// number of worker threads. `first_trace`, if given, receives run 0's trace.
MonteCarloStats monte_carlo(const BeliefChain& plan, const VehicleModel& model, const ProcessNoise& plan_w, int runs,
                            double chi2, std::uint64_t seed, const Environment* env = nullptr,
                            SimulationTrace* first_trace = nullptr);

Rng run_rng(std::uint64_t seed, std::uint64_t run);

}  // namespace infogeo
