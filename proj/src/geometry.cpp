#include "infogeo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "infogeo/errors.hpp"

namespace infogeo {

namespace {

// Stack-allocated small vectors/matrices for the collision hot paths.
using SVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using SMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

double dist2_point_segment(const SVec& p, const SVec& a, const SVec& b) {
  const SVec ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).squaredNorm();
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
double dist2_point_triangle(const SVec& p, const SVec& a, const SVec& b, const SVec& c) {
  const SVec ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.squaredNorm();
  const SVec bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.squaredNorm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (a + v * ab - p).squaredNorm();
  }
  const SVec cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.squaredNorm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (a + w * ac - p).squaredNorm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (b + w * (c - b) - p).squaredNorm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (a + ab * v + ac * w - p).squaredNorm();
}

Vec cross3(const Vec& a, const Vec& b) {
  Vec c(3);
  c << a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0);
  return c;
}

// Facet triples of the 3-D hull of `pts` with their outward normals. Every
// face is covered by the triangles of vertex triples lying on it.
struct Facet3 {
  std::vector<int> idx;
  Vec normal;
  double offset;
};

std::vector<Facet3> hull_facets_3d(const std::vector<Vec>& pts, double eps) {
  std::vector<Facet3> out;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        Vec nrm = cross3(pts[j] - pts[i], pts[k] - pts[i]);
        const double len = nrm.norm();
        if (len <= eps) continue;
        nrm /= len;
        bool all_below = true, all_above = true;
        for (int m = 0; m < n; ++m) {
          const double s = nrm.dot(pts[m] - pts[i]);
          if (s > eps) all_below = false;
          if (s < -eps) all_above = false;
        }
        if (!all_below && !all_above) continue;
        if (!all_below) nrm = -nrm;
        out.push_back({{i, j, k}, nrm, nrm.dot(pts[i])});
      }
  return out;
}

bool inside_facets(const std::vector<Facet3>& facets, const Vec& p, double eps) {
  for (const auto& f : facets)
    if (f.normal.dot(p) - f.offset > eps) return false;
  return !facets.empty();
}

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
}

}  // namespace

// ---------------------------------------------------------------------------
// Box

bool Box::contains(const Vec& p, double tol) const {
  if (p.size() != min.size()) throw DimensionMismatch("Box::contains: dimension mismatch");
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) < min(i) - tol || p(i) > max(i) + tol) return false;
  return true;
}

Vec Box::project(const Vec& p) const {
  if (p.size() != min.size()) throw DimensionMismatch("Box::project: dimension mismatch");
  return p.cwiseMax(min).cwiseMin(max);
}

bool Box::within(const Box& outer) const {
  return dim() == outer.dim() && (min.array() >= outer.min.array()).all() && (max.array() <= outer.max.array()).all();
}

// ---------------------------------------------------------------------------
// ConvexObstacle

ConvexObstacle::ConvexObstacle(std::vector<Vec> vertices) {
  if (vertices.empty()) throw ValidationError("obstacle: no vertices");
  dim_ = static_cast<int>(vertices.front().size());
  if (dim_ < 1 || dim_ > 3) throw ValidationError("obstacle: only 1-, 2- and 3-D polytopes are supported");
  for (const auto& v : vertices) {
    if (v.size() != dim_) throw ValidationError("obstacle: vertices differ in dimension");
    if (!v.allFinite()) throw ValidationError("obstacle: non-finite vertex");
  }

  double scale = 0.0;
  for (const auto& v : vertices) scale = std::max(scale, (v - vertices.front()).norm());
  eps_ = 1e-12 * std::max(1.0, scale);

  if (dim_ == 1) {
    auto [lo, hi] = std::minmax_element(vertices.begin(), vertices.end(),
                                        [](const Vec& a, const Vec& b) { return a(0) < b(0); });
    if ((*hi)(0) - (*lo)(0) <= eps_) throw ValidationError("obstacle: degenerate 1-D interval");
    vertices_ = {*lo, *hi};
    facets_ = {{0}, {1}};
    halfspaces_ = {{Vec::Constant(1, -1.0), -(*lo)(0)}, {Vec::Constant(1, 1.0), (*hi)(0)}};
  } else if (dim_ == 2) {
    // Andrew's monotone chain; collinear points are dropped.
    std::vector<Vec> pts = vertices;
    std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
      return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
    });
    std::vector<Vec> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= eps_ * scale) --k;
      hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i]) <= eps_ * scale) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k > 0 ? k - 1 : 0);
    if (hull.size() < 3) throw ValidationError("obstacle: fewer than 3 non-collinear vertices in 2-D");
    vertices_ = std::move(hull);
    const int n = static_cast<int>(vertices_.size());
    for (int i = 0; i < n; ++i) {
      const Vec& a = vertices_[i];
      const Vec& b = vertices_[(i + 1) % n];
      Vec nrm(2);
      nrm << b(1) - a(1), -(b(0) - a(0));
      nrm.normalize();
      facets_.push_back({i, (i + 1) % n});
      halfspaces_.push_back({nrm, nrm.dot(a)});
    }
  } else {
    // Keep only extreme points: a vertex inside the hull of the others is redundant.
    std::vector<Vec> kept;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      std::vector<Vec> others;
      for (std::size_t j = 0; j < vertices.size(); ++j)
        if (j != i) others.push_back(vertices[j]);
      const auto f = hull_facets_3d(others, eps_);
      if (!inside_facets(f, vertices[i], eps_)) kept.push_back(vertices[i]);
    }
    // Exact duplicates survive the test above pairwise; collapse them.
    std::vector<Vec> unique;
    for (const auto& v : kept)
      if (std::none_of(unique.begin(), unique.end(), [&](const Vec& u) { return (u - v).norm() <= eps_; }))
        unique.push_back(v);
    if (unique.size() < 4) throw ValidationError("obstacle: fewer than 4 extreme vertices in 3-D");
    const auto facets = hull_facets_3d(unique, eps_);
    if (facets.size() < 4) throw ValidationError("obstacle: degenerate 3-D polytope");
    vertices_ = std::move(unique);
    for (const auto& f : facets) {
      facets_.push_back(f.idx);
      halfspaces_.push_back({f.normal, f.offset});
    }
  }

  bound_center_ = Vec::Zero(dim_);
  for (const auto& v : vertices_) bound_center_ += v;
  bound_center_ /= static_cast<double>(vertices_.size());
  for (const auto& v : vertices_) bound_radius_ = std::max(bound_radius_, (v - bound_center_).norm());
}

bool ConvexObstacle::contains(const Vec& p) const {
  if (p.size() != dim_) throw DimensionMismatch("ConvexObstacle::contains: dimension mismatch");
  for (const auto& h : halfspaces_)
    if (h.normal.dot(p) - h.offset > eps_) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Environment

void Environment::validate() const {
  const int d = dim();
  if (d < 1) throw ValidationError("environment: empty workspace bounds");
  if (bounds.max.size() != d) throw ValidationError("environment: bounds min/max differ in dimension");
  if (!((bounds.max - bounds.min).array() > 0.0).all()) throw ValidationError("environment: bounds are empty");
  for (std::size_t i = 0; i < obstacles.size(); ++i)
    if (obstacles[i].dim() != d)
      throw ValidationError("environment: obstacle " + std::to_string(i) + " has the wrong dimension");
  try {
    infogeo::validate(start);
  } catch (const Error& e) {
    throw ValidationError(std::string("environment start: ") + e.what());
  }
  if (start.dim() != d) throw ValidationError("environment: start dimension differs from workspace");
  if (!bounds.contains(start.mean)) throw ValidationError("environment: start mean lies outside the workspace");
  if (goal_box.dim() != d || goal_box.max.size() != d) throw ValidationError("environment: goal box dimension");
  if (!((goal_box.max - goal_box.min).array() >= 0.0).all()) throw ValidationError("environment: goal box is empty");
  if (!goal_box.within(bounds)) throw ValidationError("environment: goal box is not inside the workspace");
  if (goal_cov.rows() != d || goal_cov.cols() != d) throw ValidationError("environment: goal covariance shape");
  if (!is_positive_definite(goal_cov)) throw ValidationError("environment: goal covariance is not SPD");
  if (!(chi2 > 0.0) || !std::isfinite(chi2)) throw ValidationError("environment: chi2 must be positive");
}

bool Environment::point_blocked(const Vec& x) const {
  if (!bounds.contains(x)) return true;
  return std::any_of(obstacles.begin(), obstacles.end(), [&](const ConvexObstacle& o) { return o.contains(x); });
}

void CovSampleBounds::validate(int dim) const {
  if (!(rho > 0.0) || !(trace_max > 0.0) || rho * dim > trace_max)
    throw ValidationError("covariance sampling bounds need 0 < rho·d <= trace_max");
}

double chi2_quantile(int dof, double confidence) {
  if (dof < 1) throw InvalidArgument("chi2_quantile: dof must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("chi2_quantile: confidence must be in (0, 1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), confidence);
}

// ---------------------------------------------------------------------------
// Mahalanobis clearance

namespace {

double obstacle_mahalanobis(const SVec& c, const Eigen::LLT<SMat>& llt, const ConvexObstacle& obs) {
  const Vec cv = c;
  if (obs.contains(cv)) return 0.0;
  const auto& verts = obs.vertices();
  std::vector<SVec> y;
  y.reserve(verts.size());
  for (const auto& v : verts) {
    SVec diff = SVec(v) - c;
    y.push_back(llt.matrixL().solve(diff));
  }
  const SVec origin = SVec::Zero(c.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : obs.facets()) {
    double v;
    if (f.size() == 1)
      v = y[f[0]].squaredNorm();
    else if (f.size() == 2)
      v = dist2_point_segment(origin, y[f[0]], y[f[1]]);
    else
      v = dist2_point_triangle(origin, y[f[0]], y[f[1]], y[f[2]]);
    best = std::min(best, v);
  }
  return best;
}

Eigen::LLT<SMat> factor(const Mat& cov) {
  Eigen::LLT<SMat> llt{SMat(symmetrize(cov))};
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Mahalanobis distance: covariance is not positive definite");
  return llt;
}

}  // namespace

double min_mahalanobis(const Vec& center, const Mat& cov, const ConvexObstacle& obstacle) {
  if (center.size() != obstacle.dim() || cov.rows() != center.size() || cov.cols() != center.size())
    throw DimensionMismatch("min_mahalanobis: dimension mismatch");
  require_spd(cov, "min_mahalanobis");
  return obstacle_mahalanobis(SVec(center), factor(cov), obstacle);
}

double min_mahalanobis(const Vec& center, const Mat& cov, const Environment& env, double cap) {
  const int d = env.dim();
  if (center.size() != d || cov.rows() != d || cov.cols() != d)
    throw DimensionMismatch("min_mahalanobis: dimension mismatch");
  const SVec c(center);
  double best = std::numeric_limits<double>::infinity();

  // Workspace walls {x_i <= min_i} and {x_i >= max_i}.
  for (int i = 0; i < d; ++i) {
    const double lo = c(i) - env.bounds.min(i);
    const double hi = env.bounds.max(i) - c(i);
    if (lo <= 0.0 || hi <= 0.0) return 0.0;
    best = std::min(best, std::min(lo * lo, hi * hi) / cov(i, i));
  }
  if (env.obstacles.empty()) return best;

  const Eigen::LLT<SMat> llt = factor(cov);
  const double trace = cov.trace();  // >= λ_max
  for (const auto& obs : env.obstacles) {
    const double gap = std::max(0.0, (center - obs.bounding_center()).norm() - obs.bounding_radius());
    const double lower = gap * gap / trace;
    if (lower >= std::min(best, cap)) continue;
    best = std::min(best, obstacle_mahalanobis(c, llt, obs));
    if (best == 0.0) return 0.0;
  }
  return best;
}

bool point_collision_free(const Belief& b, const Environment& env) {
  return min_mahalanobis(b.mean, b.cov, env, env.chi2) >= env.chi2;
}

bool segment_collision_free(const Belief& from, const Vec& to_mean, const ProcessNoise& w, const Environment& env,
                            double clearance_step) {
  if (to_mean.size() != from.dim() || w.dim() != from.dim() || env.dim() != from.dim())
    throw DimensionMismatch("segment_collision_free: dimension mismatch");
  if (!(clearance_step > 0.0)) throw InvalidArgument("segment_collision_free: clearance step must be positive");

  const double chi2 = env.chi2;
  if (min_mahalanobis(from.mean, from.cov, env, chi2) < chi2) return false;
  const Vec dx = to_mean - from.mean;
  const double len = dx.norm();
  if (len < kZeroTravel) return true;

  const double chi = std::sqrt(chi2);
  // Weyl: λ_min(P + sW) >= λ_min(P) + s·λ_min(W).
  const double lmin_from = min_eigenvalue(from.cov);
  const double lmin_w = std::max(0.0, min_eigenvalue(w.matrix()));

  // Between grid points, the Mahalanobis distance at λ is at least the value
  // at the right end b minus the Mahalanobis length of the remaining move
  // measured in P(b), since P(λ) ⪯ P(b).
  auto interval_free = [&](auto&& self, double a, double b) -> bool {
    const Vec x = from.mean + b * dx;
    const Mat p = from.cov + (b * len) * w.matrix();
    const double margin = (b - a) * len / std::sqrt(lmin_from + b * len * lmin_w);
    const double target = (chi + margin) * (chi + margin);
    const double m = min_mahalanobis(x, p, env, target);
    if (m >= target) return true;
    if (m < chi2) return false;
    if ((b - a) * len < 1e-9) return false;
    const double mid = 0.5 * (a + b);
    return self(self, a, mid) && self(self, mid, b);
  };

  const int n = std::max(1, static_cast<int>(std::ceil(len / clearance_step)));
  for (int i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / n;
    const double b = static_cast<double>(i + 1) / n;
    if (!interval_free(interval_free, a, b)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Ellipsoid containment

bool ellipsoid_contained(const Belief& inner, const Belief& outer, double chi2) {
  if (inner.dim() != outer.dim()) throw DimensionMismatch("ellipsoid_contained: dimension mismatch");
  if (!(chi2 > 0.0)) throw InvalidArgument("ellipsoid_contained: chi2 must be positive");
  const int d = inner.dim();

  // Whiten by the inner ellipsoid: inner -> ball of radius χ at the origin,
  // outer -> {z : (z − c)ᵀ A (z − c) <= χ²}.
  const SymEig ie = sym_eig(inner.cov);
  if (!(ie.values(0) > 0.0)) throw NotPositiveDefinite("ellipsoid_contained: inner covariance");
  const Mat in_sqrt = ie.vectors * ie.values.cwiseSqrt().asDiagonal() * ie.vectors.transpose();
  const Mat in_inv_sqrt = ie.vectors * ie.values.cwiseSqrt().cwiseInverse().asDiagonal() * ie.vectors.transpose();
  const Mat a = symmetrize(in_sqrt * spd_inverse(outer.cov) * in_sqrt);
  const Vec c = in_inv_sqrt * (outer.mean - inner.mean);

  const double rel_tol = 1e-10;
  const double center_term = c.dot(a * c);  // cᵀAc
  const SymEig ae = sym_eig(a);
  const double a_max = ae.values(d - 1);

  // Necessary: τ >= λ_max(A) and τ <= 1 − cᵀAc/χ².
  const double tau_lo = a_max;
  const double tau_hi = 1.0 - center_term / chi2;
  if (tau_lo > tau_hi + rel_tol) return false;

  // Sufficient: χ·sqrt(λ_max(A)) + sqrt(cᵀAc) <= χ by the triangle inequality.
  const double chi = std::sqrt(chi2);
  if (chi * std::sqrt(a_max) + std::sqrt(center_term) <= chi * (1.0 - rel_tol)) return true;

  // S-procedure: contained iff ∃τ >= 0 with
  //   M(τ) = [[τI − A, Ac], [cᵀA, χ²(1 − τ) − cᵀAc]] ⪰ 0.
  // λ_min(M(τ)) is concave in τ; maximize it by golden-section search.
  const Vec ac = a * c;
  Mat m(d + 1, d + 1);
  auto g = [&](double tau) {
    m.topLeftCorner(d, d) = tau * Mat::Identity(d, d) - a;
    m.topRightCorner(d, 1) = ac;
    m.bottomLeftCorner(1, d) = ac.transpose();
    m(d, d) = chi2 * (1.0 - tau) - center_term;
    return min_eigenvalue(m);
  };
  const double scale = std::max({1.0, a_max, chi2});
  const double accept = -rel_tol * scale;

  double lo = std::min(tau_lo, tau_hi), hi = std::max(tau_lo, tau_hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  while (hi - lo > 1e-10 * std::max(1.0, std::abs(hi))) {
    if (std::max(g1, g2) >= accept) return true;
    if (g1 < g2) {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + inv_phi * (hi - lo);
      g2 = g(x2);
    } else {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - inv_phi * (hi - lo);
      g1 = g(x1);
    }
  }
  return std::max({g1, g2, g(0.5 * (lo + hi))}) >= accept;
}

// ---------------------------------------------------------------------------
// Sampling

Mat sample_covariance(int dim, const CovSampleBounds& bounds, Rng& rng) {
  bounds.validate(dim);
  std::uniform_real_distribution<double> eig(bounds.rho, bounds.trace_max / dim);
  Vec lambda(dim);
  for (int i = 0; i < dim; ++i) lambda(i) = eig(rng);

  Mat rot = Mat::Identity(dim, dim);
  if (dim == 2) {
    const double th = std::uniform_real_distribution<double>(0.0, M_PI)(rng);
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  } else if (dim >= 3) {
    std::normal_distribution<double> gauss;
    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Mat> qr(g);
    rot = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < dim; ++i)
      if (r(i, i) < 0.0) rot.col(i) = -rot.col(i);
  }
  return symmetrize(rot * lambda.asDiagonal() * rot.transpose());
}

Belief sample_free_belief(const Environment& env, const CovSampleBounds& bounds, Rng& rng, int max_attempts) {
  const int d = env.dim();
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Mat cov = sample_covariance(d, bounds, rng);
    Vec mean(d);
    for (int i = 0; i < d; ++i) mean(i) = std::uniform_real_distribution<double>(env.bounds.min(i), env.bounds.max(i))(rng);
    Belief b{std::move(mean), std::move(cov)};
    if (point_collision_free(b, env)) return b;
  }
  throw SamplingBudgetExhausted("sample_free_belief: no collision-free belief after " + std::to_string(max_attempts) +
                                " attempts");
}

}  // namespace infogeo
