#include <doctest.h>

#include <cmath>

#include "infogeo/belief.hpp"
#include "infogeo/errors.hpp"
#include "oracles.hpp"

using namespace infogeo;

namespace {

Mat diag(std::initializer_list<double> v) {
  Vec d(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

Mat scalar(double x) { return Mat::Constant(1, 1, x); }
Vec vec1(double x) { return Vec::Constant(1, x); }

Belief random_belief(int d, double rho, Rng& rng) {
  Vec m(d);
  for (int i = 0; i < d; ++i) m(i) = oracle::uniform(rng, -1.0, 1.0);
  return Belief{m, oracle::random_spd(d, rho, 1.0, rng)};
}

ProcessNoise random_w(int d, Rng& rng) {
  const Mat q = oracle::random_rotation(d, rng);
  Vec ev(d);
  for (int i = 0; i < d; ++i) ev(i) = oracle::uniform(rng, 0.0, 0.5);
  ev(0) = 0.0;  // exercise a singular W
  return ProcessNoise(symmetrize(q * ev.asDiagonal() * q.transpose()));
}

// Lossless chain with a strict margin so small perturbations stay lossless.
BeliefChain margin_chain(int nodes, const ProcessNoise& w, Rng& rng) {
  BeliefChain c{Belief{Vec::Zero(2), diag({0.5, 0.4})}};
  for (int k = 1; k < nodes; ++k) {
    Vec step(2);
    step << oracle::uniform(rng, 0.2, 0.5), oracle::uniform(rng, -0.3, 0.3);
    const Belief& prev = c.back();
    const Mat prior = prior_covariance(prev.cov, step.norm(), w);
    // Shrink strictly below the prior, or keep it when no reduction is wanted.
    const double shrink = oracle::uniform(rng, 0.5, 0.9);
    c.push_back(Belief{prev.mean + step, shrink * prior});
  }
  return c;
}

}  // namespace

TEST_CASE("travel cost") {
  Vec a(2), b(2);
  a << 0, 0;
  b << 3, 4;
  CHECK(travel_cost(Belief{a, Mat::Identity(2, 2)}, Belief{a, Mat::Identity(2, 2)}) == 0.0);
  CHECK(travel_cost(Belief{a, Mat::Identity(2, 2)}, Belief{b, Mat::Identity(2, 2)}) == doctest::Approx(5.0).epsilon(1e-15));

  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Belief x = random_belief(3, 0.1, rng), y = random_belief(3, 0.1, rng);
    double s = 0;
    for (int k = 0; k < 3; ++k) s += (x.mean(k) - y.mean(k)) * (x.mean(k) - y.mean(k));
    CHECK(std::abs(travel_cost(x, y) - std::sqrt(s)) < 1e-12);
    CHECK(travel_cost(x, y) == travel_cost(y, x));
  }
  CHECK_THROWS_AS(travel_cost(Belief{a, Mat::Identity(2, 2)}, Belief{vec1(0), scalar(1)}), DimensionMismatch);
}

TEST_CASE("prior covariance") {
  CHECK(prior_covariance(Mat::Identity(2, 2), 0.0, ProcessNoise::isotropic(2, 1.0)).isApprox(Mat::Identity(2, 2)));
  CHECK(prior_covariance(scalar(1), 3.0, ProcessNoise(scalar(1)))(0, 0) == doctest::Approx(4.0));
  const Mat p = prior_covariance(diag({1, 2}), 10.0, ProcessNoise::isotropic(2, 1e-3));
  CHECK((p - diag({1.01, 2.01})).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(prior_covariance(scalar(1), -1.0, ProcessNoise(scalar(1))), InvalidArgument);
  // Travel below the zero-travel threshold adds nothing.
  CHECK(prior_covariance(scalar(1), 1e-13, ProcessNoise(scalar(1)))(0, 0) == 1.0);
}

TEST_CASE("lossless projection") {
  CHECK(lossless_project(scalar(1), scalar(4))(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lossless_project(scalar(4), scalar(1))(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  Rng rng(2);
  for (int d = 1; d <= 3; ++d) {
    for (int i = 0; i < 40; ++i) {
      const Mat prior = oracle::random_spd(d, 0.1, 5.0, rng);
      const Mat post = oracle::random_spd(d, 0.1, 5.0, rng);
      const Mat q = lossless_project(prior, post);
      CHECK(psd_leq(q, prior));
      CHECK(psd_leq(q, post));
      const Mat ref = oracle::maxdet(prior, post);
      CHECK((q - ref).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(std::abs(info_cost(prior, post) - oracle::info_cost(prior, post)) < 1e-6);
    }
  }
  CHECK_THROWS_AS(lossless_project(diag({1, -1}), Mat::Identity(2, 2)), NotPositiveDefinite);
  CHECK_THROWS_AS(lossless_project(Mat::Identity(2, 2), scalar(1)), DimensionMismatch);
}

TEST_CASE("projection is optimal among feasible candidates") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Mat prior = oracle::random_spd(2, 0.1, 3.0, rng);
    const Mat post = oracle::random_spd(2, 0.1, 3.0, rng);
    const double best = log_det_spd(lossless_project(prior, post));
    for (int k = 0; k < 200; ++k) {
      // Random feasible Q: shrink a random SPD matrix until it sits under both caps.
      Mat q = oracle::random_spd(2, 0.01, 3.0, rng);
      while (!psd_leq(q, prior, 0.0) || !psd_leq(q, post, 0.0)) q *= 0.9;
      CHECK(log_det_spd(q) <= best + 1e-9);
    }
  }
}

TEST_CASE("information cost") {
  CHECK(info_cost(Mat::Identity(2, 2), Mat::Identity(2, 2)) == 0.0);
  CHECK(info_cost(scalar(4), scalar(1)) == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-14));
  CHECK(info_cost(scalar(1), scalar(4)) == 0.0);

  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    // Ordered pair: closed form reduces to the log-det ratio.
    const Mat post = oracle::random_spd(3, 0.1, 1.0, rng);
    const Mat prior = post + oracle::random_spd(3, 0.01, 1.0, rng);
    CHECK(info_cost(prior, post) == doctest::Approx(0.5 * (log_det_spd(prior) - log_det_spd(post))).epsilon(1e-10));
  }
}

TEST_CASE("monotonicity in the prior") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const int d = 1 + i % 3;
    const Mat y = oracle::random_spd(d, 0.05, 2.0, rng);
    const Mat x1 = oracle::random_spd(d, 0.05, 2.0, rng);
    const Mat x2 = x1 + oracle::random_spd(d, 1e-4, 1.0, rng);
    CHECK(info_cost(x1, y) <= info_cost(x2, y) + 1e-9);
  }
}

TEST_CASE("steering cost") {
  const ProcessNoise w(scalar(1));
  const Belief a{vec1(0), scalar(1)}, b{vec1(3), scalar(1)};
  const CostBreakdown c = steering_cost(a, b, 2.0, w);
  CHECK(c.travel == doctest::Approx(3.0));
  CHECK(c.info == doctest::Approx(0.5 * std::log(4.0)));
  CHECK(c.total == doctest::Approx(3.0 + std::log(4.0)));
  CHECK(c.total == doctest::Approx(4.386294).epsilon(1e-6));
  CHECK(steering_cost(a, a, 5.0, w).total == 0.0);
  // Posterior above the prior: pure travel.
  const Belief big{vec1(3), scalar(10)};
  CHECK(steering_cost(a, big, 3.0, w).total == 3.0);
  CHECK_THROWS_AS(steering_cost(a, b, -1.0, w), InvalidArgument);
}

TEST_CASE("quasi-pseudometric properties") {
  Rng rng(6);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const int d = 1 + i % 3;
    const ProcessNoise w = random_w(d, rng);
    const double alpha = oracle::uniform(rng, 0.0, 2.0);
    const Belief b1 = random_belief(d, 0.01, rng), b2 = random_belief(d, 0.01, rng), b3 = random_belief(d, 0.01, rng);
    const double d12 = steering_cost(b1, b2, alpha, w).total;
    const double d13 = steering_cost(b1, b3, alpha, w).total;
    const double d32 = steering_cost(b3, b2, alpha, w).total;
    if (d12 > d13 + d32 + 1e-9) ++violations;
    CHECK(d12 >= 0.0);
    CHECK(steering_cost(b1, b1, alpha, w).total == 0.0);
  }
  CHECK(violations == 0);

  // Asymmetry: same mean, P1 strictly below P2.
  const ProcessNoise w = ProcessNoise::isotropic(2, 0.1);
  const Belief p1{Vec::Zero(2), diag({1, 1})}, p2{Vec::Zero(2), diag({2, 3})};
  CHECK(steering_cost(p1, p2, 1.0, w).total == 0.0);
  CHECK(steering_cost(p2, p1, 1.0, w).total > 0.0);
}

TEST_CASE("is_lossless") {
  const ProcessNoise w(scalar(1));
  CHECK(is_lossless(Belief{vec1(0), scalar(1)}, Belief{vec1(1), scalar(2)}, w));
  CHECK_FALSE(is_lossless(Belief{vec1(0), scalar(1)}, Belief{vec1(1), scalar(3)}, w));
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + i % 3;
    const ProcessNoise wr = random_w(d, rng);
    const Belief from = random_belief(d, 0.05, rng), to = random_belief(d, 0.05, rng);
    const Mat prior = prior_covariance(from.cov, travel_cost(from, to), wr);
    CHECK(is_lossless(from, Belief{to.mean, lossless_project(prior, to.cov)}, wr));
  }
}

TEST_CASE("chain cost") {
  const ProcessNoise w = ProcessNoise::isotropic(2, 0.1);
  Rng rng(8);
  const BeliefChain one{random_belief(2, 0.1, rng)};
  const CostBreakdown z = chain_cost(one, 1.0, w);
  CHECK(z.travel == 0.0);
  CHECK(z.info == 0.0);
  CHECK(z.total == 0.0);

  BeliefChain c;
  for (int i = 0; i < 5; ++i) c.push_back(random_belief(2, 0.1, rng));
  const CostBreakdown two = chain_cost(BeliefChain{c[0], c[1]}, 0.7, w);
  CHECK(two.total == steering_cost(c[0], c[1], 0.7, w).total);
  double travel = 0, info = 0, total = 0;
  for (int k = 0; k + 1 < 5; ++k) {
    const CostBreakdown s = steering_cost(c[k], c[k + 1], 0.7, w);
    travel += s.travel;
    info += s.info;
    total += s.total;
  }
  const CostBreakdown all = chain_cost(c, 0.7, w);
  CHECK(std::abs(all.travel - travel) < 1e-12);
  CHECK(std::abs(all.info - info) < 1e-12);
  CHECK(std::abs(all.total - total) < 1e-12);
  CHECK_THROWS(chain_cost(BeliefChain{}, 1.0, w));
}

TEST_CASE("lossless chain modification") {
  const ProcessNoise w1(scalar(1));
  const BeliefChain s{{vec1(0), scalar(1)}, {vec1(1), scalar(5)}};
  CHECK(chain_lossless_modify(s, w1)[1].cov(0, 0) == doctest::Approx(2.0));

  Rng rng(9);
  const ProcessNoise w = ProcessNoise::isotropic(2, 0.2);
  const BeliefChain lossless = margin_chain(6, w, rng);
  const BeliefChain same = chain_lossless_modify(lossless, w);
  for (std::size_t k = 0; k < lossless.size(); ++k) CHECK((same[k].cov - lossless[k].cov).cwiseAbs().maxCoeff() < 1e-9);

  for (int i = 0; i < 200; ++i) {
    BeliefChain c;
    for (int k = 0; k < 10; ++k) c.push_back(random_belief(2, 0.01, rng));
    const BeliefChain m = chain_lossless_modify(c, w);
    REQUIRE(m.size() == c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
      CHECK(m[k].mean == c[k].mean);
      CHECK(psd_leq(m[k].cov, c[k].cov));
      if (k) CHECK(is_lossless(m[k - 1], m[k], w));
    }
    const double alpha = oracle::uniform(rng, 0.0, 2.0);
    CHECK(chain_cost(m, alpha, w).total <= chain_cost(c, alpha, w).total + 1e-9);
  }
}

TEST_CASE("total variation") {
  const ProcessNoise w = ProcessNoise::isotropic(2, 1.0);
  Rng rng(10);
  BeliefChain a;
  for (int k = 0; k < 6; ++k) a.push_back(random_belief(2, 0.1, rng));
  CHECK(chain_total_variation(a, a, w) == 0.0);

  Vec delta(2);
  delta << 0.3, -0.4;
  const BeliefChain s1{a[0]}, s2{Belief{a[0].mean + delta, a[0].cov}};
  CHECK(chain_total_variation(s2, s1, w) == doctest::Approx(0.5));

  const ProcessNoise wr = random_w(2, rng);
  for (int i = 0; i < 50; ++i) {
    BeliefChain b = a;
    for (auto& x : b) {
      x.mean += 0.1 * oracle::gaussian_vec(2, rng);
      x.cov += 0.01 * oracle::random_sym(2, rng);
    }
    CHECK(std::abs(chain_total_variation(a, b, wr) - oracle::total_variation(a, b, wr.matrix())) < 1e-12);
  }
  CHECK_THROWS(chain_total_variation(a, BeliefChain{a[0]}, w));
}

TEST_CASE("cost is continuous in total variation") {
  Rng rng(11);
  const ProcessNoise w = ProcessNoise::isotropic(2, 0.1);
  const BeliefChain base = margin_chain(8, w, rng);
  const double base_cost = chain_cost(base, 0.5, w).total;
  std::vector<double> worst;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    double m = 0.0;
    for (int i = 0; i < 30; ++i) {
      BeliefChain dir = base;
      for (auto& x : dir) {
        x.mean = oracle::gaussian_vec(2, rng);
        x.cov = oracle::random_sym(2, rng);
      }
      BeliefChain zero = base;
      for (auto& x : zero) {
        x.mean.setZero();
        x.cov.setZero();
      }
      const double scale = delta / oracle::total_variation(dir, zero, w.matrix());
      BeliefChain p = base;
      for (std::size_t k = 0; k < p.size(); ++k) {
        p[k].mean += scale * dir[k].mean;
        p[k].cov += scale * dir[k].cov;
      }
      for (std::size_t k = 1; k < p.size(); ++k) REQUIRE(is_lossless(p[k - 1], p[k], w));
      m = std::max(m, std::abs(chain_cost(p, 0.5, w).total - base_cost));
    }
    worst.push_back(m);
  }
  CHECK(worst[1] <= worst[0]);
  CHECK(worst[2] <= worst[1]);
  for (int i = 0; i < 3; ++i) CHECK(worst[i] <= 50.0 * std::pow(10.0, -2 - i));
}

TEST_CASE("belief validation") {
  CHECK_THROWS_AS(Belief::make(Vec::Zero(2), Mat::Identity(3, 3)), DimensionMismatch);
  CHECK_THROWS_AS(Belief::make(Vec::Zero(2), diag({1, 0})), NotPositiveDefinite);
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 1e-6;
  CHECK_THROWS(Belief::make(Vec::Zero(2), asym));
  CHECK_NOTHROW(Belief::make(Vec::Zero(2), Mat::Identity(2, 2)));
  CHECK_THROWS(ProcessNoise(diag({1, -1})));
}
