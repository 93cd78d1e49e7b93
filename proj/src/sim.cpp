#include "infogeo/sim.hpp"

#include <cmath>
#include <random>

#include "infogeo/errors.hpp"
#include "infogeo/parallel.hpp"

namespace infogeo {

namespace {

// Square root of a PSD matrix; roundoff-negative eigenvalues are clipped.
Mat psd_sqrt(const Mat& a) {
  const SymEig e = sym_eig(a);
  return e.vectors * e.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() * e.vectors.transpose();
}

Vec gaussian(Rng& rng, const Mat& root) {
  std::normal_distribution<double> n;
  Vec z(root.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = n(rng);
  return root * z;
}

void require_reference(const ReferenceTrajectory& ref, const char* what) {
  if (ref.samples.empty()) throw SimulationError(std::string(what) + ": empty reference trajectory");
}

}  // namespace

ReferenceTrajectory discretize_reference(const BeliefChain& chain, double speed, double dt, const ProcessNoise& w) {
  if (chain.size() < 2) throw InvalidArgument("discretize_reference: chain needs at least two beliefs");
  if (!(speed > 0.0) || !(dt > 0.0)) throw InvalidArgument("discretize_reference: speed and dt must be positive");
  for (const auto& b : chain)
    if (b.dim() != w.dim()) throw DimensionMismatch("discretize_reference: chain and W differ in dimension");

  const double h = speed * dt;
  ReferenceTrajectory out;
  auto emit = [&](Vec m, Mat p) {
    const double t = out.samples.empty() ? 0.0 : out.samples.back().time + dt;
    out.samples.push_back({std::move(m), std::move(p), t});
  };
  emit(chain.front().mean, chain.front().cov);

  double carry = 0.0;  // arc length travelled since the last sample
  bool at_last = true;  // last sample coincides with the current waypoint
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    const Belief& a = chain[k];
    const Belief& b = chain[k + 1];
    const Vec delta = b.mean - a.mean;
    const double len = delta.norm();
    if (len < kZeroTravel) {
      // Covariance step without motion.
      emit(b.mean, b.cov);
      carry = 0.0;
      at_last = true;
      continue;
    }
    const double eps = 1e-12 * std::max(1.0, len);
    double o = h - carry;
    while (o < len - eps) {
      emit(a.mean + (o / len) * delta, a.cov + o * w.matrix());
      o += h;
    }
    if (std::abs(o - len) <= eps) {
      emit(b.mean, b.cov);
      carry = 0.0;
      at_last = true;
    } else {
      carry = len - (o - h);
      at_last = false;
    }
  }
  if (!at_last) emit(chain.back().mean, chain.back().cov);
  return out;
}

std::string to_string(VehicleKind k) {
  return k == VehicleKind::SingleIntegrator ? "single_integrator" : "double_integrator";
}

VehicleKind vehicle_kind_from_string(const std::string& s) {
  if (s == "single_integrator") return VehicleKind::SingleIntegrator;
  if (s == "double_integrator") return VehicleKind::DoubleIntegrator;
  throw ValidationError("unknown vehicle model '" + s + "' (expected single_integrator or double_integrator)");
}

int VehicleModel::state_dim(int plan_dim) const {
  return kind == VehicleKind::SingleIntegrator ? plan_dim : 2 * plan_dim;
}

void VehicleModel::validate(int plan_dim) const {
  if (!(dt > 0.0)) throw ValidationError("vehicle: dt must be positive");
  if (!(speed > 0.0)) throw ValidationError("vehicle: speed must be positive");
  const int n = state_dim(plan_dim);
  if (w.rows() != n || w.cols() != n)
    throw ValidationError("vehicle: W must be " + std::to_string(n) + "×" + std::to_string(n));
  if (!w.allFinite() || asymmetry(w) > kSymTol || min_eigenvalue(w) < -kPsdTol)
    throw ValidationError("vehicle: W must be symmetric positive semidefinite");
  if (v.rows() != plan_dim || v.cols() != plan_dim)
    throw ValidationError("vehicle: V must be " + std::to_string(plan_dim) + "×" + std::to_string(plan_dim));
  if (!is_positive_definite(v)) throw ValidationError("vehicle: V must be symmetric positive definite");
  if (!(q_weight > 0.0) || !(r_weight > 0.0)) throw ValidationError("vehicle: LQ weights must be positive");
}

bool event_trigger(const Belief& estimate, const Belief& reference, double chi2) {
  return !ellipsoid_contained(estimate, reference, chi2);
}

SimulationTrace simulate_single_integrator(const ReferenceTrajectory& ref, const VehicleModel& model, double chi2,
                                           Rng& rng, const Environment* env, bool record_steps) {
  require_reference(ref, "simulate_single_integrator");
  const int d = static_cast<int>(ref.samples.front().mean.size());
  if (model.kind != VehicleKind::SingleIntegrator) throw InvalidArgument("simulate_single_integrator: wrong model");
  model.validate(d);

  const Mat q = model.dt * model.w;
  const Mat q_root = psd_sqrt(q);
  const Mat v_root = psd_sqrt(model.v);
  const Mat eye = Mat::Identity(d, d);

  SimulationTrace trace;
  Belief est{ref.samples.front().mean, ref.samples.front().cov};
  Vec x = est.mean + gaussian(rng, psd_sqrt(est.cov));

  for (std::size_t k = 1; k < ref.samples.size(); ++k) {
    const ReferenceSample& r = ref.samples[k];
    const Vec u = r.mean - est.mean;  // dead-beat
    x += u + gaussian(rng, q_root);
    est.mean += u;
    est.cov = symmetrize(est.cov + q);

    const bool measure = event_trigger(est, Belief{r.mean, r.cov}, chi2);
    if (measure) {
      const Vec y = x + gaussian(rng, v_root);
      const Mat s = est.cov + model.v;
      const Mat gain = symmetrize(s).llt().solve(est.cov).transpose();
      est.mean += gain * (y - est.mean);
      const Mat ikh = eye - gain;
      est.cov = symmetrize(ikh * est.cov * ikh.transpose() + gain * model.v * gain.transpose());
      ++trace.measurement_count;
    }
    if (env && env->point_blocked(x)) trace.collided = true;
    if (record_steps) trace.steps.push_back({x, est.mean, est.cov, r.mean, r.cov, measure});
  }
  return trace;
}

SimulationTrace simulate_double_integrator(const ReferenceTrajectory& ref, const VehicleModel& model, double chi2,
                                           Rng& rng, const Environment* env, bool record_steps) {
  require_reference(ref, "simulate_double_integrator");
  const int d = static_cast<int>(ref.samples.front().mean.size());
  if (model.kind != VehicleKind::DoubleIntegrator) throw InvalidArgument("simulate_double_integrator: wrong model");
  model.validate(d);
  const int n = 2 * d;
  const double dt = model.dt;
  const std::size_t horizon = ref.samples.size();

  Mat a = Mat::Identity(n, n);
  a.topRightCorner(d, d) = dt * Mat::Identity(d, d);
  Mat b = Mat::Zero(n, d);
  b.bottomRows(d) = dt * Mat::Identity(d, d);
  Mat h = Mat::Zero(d, n);
  h.leftCols(d) = Mat::Identity(d, d);
  const Mat qlq = model.q_weight * Mat::Identity(n, n);
  const Mat rlq = model.r_weight * Mat::Identity(d, d);

  // Reference state: position and the finite-difference velocity to the next sample.
  std::vector<Vec> rs(horizon, Vec::Zero(n));
  for (std::size_t k = 0; k < horizon; ++k) {
    rs[k].head(d) = ref.samples[k].mean;
    if (k + 1 < horizon) rs[k].tail(d) = (ref.samples[k + 1].mean - ref.samples[k].mean) / dt;
  }

  // Finite-horizon LQ tracker, backward sweep:
  //   K_k = (BᵀS B + R)⁻¹ BᵀS A,  S_k = AᵀS (A − B K_k) + Q,  s_k = (A − B K_k)ᵀ s + Q r_k
  // with S, s taken at k + 1; u_k = −K_k x̂_k + (BᵀS B + R)⁻¹ Bᵀ s.
  std::vector<Mat> gains(horizon);
  std::vector<Vec> feedforward(horizon);
  Mat s_mat = qlq;
  Vec s_vec = qlq * rs[horizon - 1];
  for (std::size_t k = horizon - 1; k-- > 0;) {
    const Mat g = symmetrize(b.transpose() * s_mat * b + rlq);
    const Eigen::LLT<Mat> g_llt(g);
    gains[k] = g_llt.solve(b.transpose() * s_mat * a);
    feedforward[k] = g_llt.solve(b.transpose() * s_vec);
    const Mat closed = a - b * gains[k];
    s_mat = symmetrize(a.transpose() * s_mat * closed + qlq);
    s_vec = closed.transpose() * s_vec + qlq * rs[k];
  }

  const Mat q = dt * model.w;
  const Mat q_root = psd_sqrt(q);
  const Mat v_root = psd_sqrt(model.v);
  const Mat eye = Mat::Identity(n, n);

  SimulationTrace trace;
  Vec est = Vec::Zero(n);
  est.head(d) = ref.samples.front().mean;
  Mat p = Mat::Zero(n, n);
  p.topLeftCorner(d, d) = ref.samples.front().cov;
  Vec x = est + gaussian(rng, psd_sqrt(p));

  for (std::size_t k = 0; k + 1 < horizon; ++k) {
    const ReferenceSample& r = ref.samples[k + 1];
    const Vec u = -gains[k] * est + feedforward[k];
    x = a * x + b * u + gaussian(rng, q_root);
    est = a * est + b * u;
    p = symmetrize(a * p * a.transpose() + q);

    const bool measure = event_trigger(Belief{est.head(d), p.topLeftCorner(d, d)}, Belief{r.mean, r.cov}, chi2);
    if (measure) {
      const Vec y = x.head(d) + gaussian(rng, v_root);
      const Mat s = symmetrize(h * p * h.transpose() + model.v);
      const Mat gain = s.llt().solve(h * p).transpose();
      est += gain * (y - h * est);
      const Mat ikh = eye - gain * h;
      p = symmetrize(ikh * p * ikh.transpose() + gain * model.v * gain.transpose());
      ++trace.measurement_count;
    }
    if (env && env->point_blocked(x.head(d))) trace.collided = true;
    if (record_steps) trace.steps.push_back({x, est, p, r.mean, r.cov, measure});
  }
  return trace;
}

SimulationTrace simulate(const ReferenceTrajectory& ref, const VehicleModel& model, double chi2, Rng& rng,
                         const Environment* env, bool record_steps) {
  if (model.kind == VehicleKind::SingleIntegrator)
    return simulate_single_integrator(ref, model, chi2, rng, env, record_steps);
  return simulate_double_integrator(ref, model, chi2, rng, env, record_steps);
}

Rng run_rng(std::uint64_t seed, std::uint64_t run) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(run >> 32)};
  return Rng(seq);
}

MonteCarloStats monte_carlo(const BeliefChain& plan, const VehicleModel& model, const ProcessNoise& plan_w, int runs,
                            double chi2, std::uint64_t seed, const Environment* env, SimulationTrace* first_trace) {
  if (runs < 1) throw InvalidArgument("monte_carlo: runs must be >= 1");
  if (plan.empty()) throw InvalidArgument("monte_carlo: empty plan");
  model.validate(plan.front().dim());
  const ReferenceTrajectory ref = discretize_reference(plan, model.speed, model.dt, plan_w);

  std::vector<int> counts(runs, 0);
  std::vector<char> collided(runs, 0);
  parallel_for(static_cast<std::size_t>(runs), [&](std::size_t i) {
    Rng rng = run_rng(seed, i);
    const bool keep = i == 0 && first_trace;
    SimulationTrace t = simulate(ref, model, chi2, rng, env, keep);
    counts[i] = t.measurement_count;
    collided[i] = t.collided ? 1 : 0;
    if (keep) *first_trace = std::move(t);
  });

  MonteCarloStats st;
  st.runs = runs;
  st.counts = counts;
  long long sum = 0;
  int hits = 0;
  for (int i = 0; i < runs; ++i) {
    sum += counts[i];
    hits += collided[i];
    ++st.histogram[counts[i]];
  }
  st.mean = static_cast<double>(sum) / runs;
  if (runs > 1) {
    double ss = 0.0;
    for (int c : counts) ss += (c - st.mean) * (c - st.mean);
    st.stddev = std::sqrt(ss / (runs - 1));
  }
  st.collision_rate = static_cast<double>(hits) / runs;
  return st;
}

}  // namespace infogeo
