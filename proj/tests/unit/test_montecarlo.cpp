#include "urnsa/asymptotics.hpp"
#include "urnsa/errors.hpp"
#include "urnsa/montecarlo.hpp"
#include "urnsa/oracle.hpp"
#include "urnsa/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace urnsa;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST(Streams, DistinctAndReproducible) {
  EXPECT_EQ(stream_seed(5, 3), stream_seed(5, 3));
  EXPECT_NE(stream_seed(5, 3), stream_seed(5, 4));
  EXPECT_NE(stream_seed(5, 3), stream_seed(6, 3));
  StreamRng a(5, 3), b(5, 3);
  for (int k = 0; k < 100; ++k) {
    const double u = a.uniform_open_closed();
    EXPECT_EQ(u, b.uniform_open_closed());
    EXPECT_GT(u, 0.0);
    EXPECT_LE(u, 1.0);
  }
}

TEST(Replications, IndependentOfWorkerCount) {
  const ModelSpec m = bhs_model(vec({0.5, 0.6, 0.7}));
  const Ensemble one = run_replications(m, {300, 24, {100, 300}, 77, 1});
  const Ensemble four = run_replications(m, {300, 24, {100, 300}, 77, 4});
  ASSERT_EQ(one.paths.size(), 24u);
  ASSERT_EQ(four.paths.size(), 24u);
  for (std::size_t r = 0; r < 24; ++r) {
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_EQ(one.paths[r][k].y_tilde, four.paths[r][k].y_tilde);
      EXPECT_EQ(one.paths[r][k].s_tilde, four.paths[r][k].s_tilde);
    }
  }
}

TEST(Stats, SingleReplicationHasNoCovariance) {
  const EnsembleStats st = compute_stats({vec({1, 2})}, vec({0, 0}), 1.0, 1);
  EXPECT_FALSE(st.covariance);
  EXPECT_EQ(st.count, 1);
}

TEST(Stats, RecoversKnownCovariance) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix L(2, 2);
  L << 1, 0, 0.5, 2;
  std::vector<Vector> xs;
  for (int k = 0; k < 20000; ++k) xs.push_back(L * vec({g(rng), g(rng)}));
  const Matrix S = L * L.transpose();
  const EnsembleStats st = compute_stats(xs, Vector::Zero(2), 1.0, 1, S);
  EXPECT_LE(relative_frobenius(*st.covariance, S), 0.05);
  for (double ks : st.ks) EXPECT_LE(ks, 0.02);
  EXPECT_NEAR(*st.mahalanobis_mean, 2.0, 0.1);
  EXPECT_EQ(st.reference_rank, 2);
}

TEST(Ks, DetectsWrongScale) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> xs(5000);
  for (double& x : xs) x = g(rng);
  EXPECT_LE(ks_normal(xs, 1.0), 0.03);
  EXPECT_GE(ks_normal(xs, 2.0), 0.1);
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
}

TEST(Consistency, WeiTwoArmsSmallEnsemble) {
  InitialComposition init{vec({0.5, 0.5}), vec({1, 1}), vec({1, 1})};
  const ModelSpec m = wei_model(vec({0.5, 0.7}), init);
  const Ensemble e = run_replications(m, {2000, 100, {500, 1000, 2000}, 2718281828ULL, 0});
  const ConsistencyReport r = consistency_check(e, vec({0.375, 0.625}), m.p(), 1.0);
  EXPECT_LE(r.mean_y_error, 0.02);
  EXPECT_LE(r.max_weight_defect, 1e-12);
  EXPECT_TRUE(r.mean_pi_error);
}

TEST(Consistency, BhsSuccessProportions) {
  const ModelSpec m = bhs_model(vec({0.5, 0.7}));
  const Ensemble e = run_replications(m, {100000, 20, {100000}, 11, 0});
  const ConsistencyReport r = consistency_check(e, bhs_v_star(m.p()), m.p(), m.initial().y0.sum());
  ASSERT_TRUE(r.mean_pi_error);
  EXPECT_LE(*r.mean_pi_error, 0.01);
}

TEST(RateFit, RecoversSyntheticSlope) {
  std::vector<std::int64_t> n;
  std::vector<double> err;
  for (std::int64_t x : geometric_checkpoints(100, 1000000, 9)) {
    n.push_back(x);
    err.push_back(3.0 * std::pow(double(x), -0.37));
  }
  const RateFit f = rate_fit(n, err);
  EXPECT_NEAR(f.slope, -0.37, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
  EXPECT_THROW(rate_fit({1, 2, 3}, {1, 1, 1}), Error);
}

TEST(Checkpoints, GeometricGrid) {
  const auto cps = geometric_checkpoints(1000, 1000000, 13);
  EXPECT_EQ(cps.front(), 1000);
  EXPECT_EQ(cps.back(), 1000000);
  for (std::size_t k = 1; k < cps.size(); ++k) EXPECT_GT(cps[k], cps[k - 1]);
}

TEST(RegimeC, NegativeControlDoesNotStabilize) {
  const ModelSpec m = wei_model(vec({0.5, 0.7}));
  const AsymptoticsBundle b = compute_asymptotics(m);
  const Ensemble e = run_replications(m, {100000, 30, geometric_checkpoints(100, 100000, 10), 5, 0});
  // Pretending the regime-a design converges at rate n^0.8.
  EXPECT_FALSE(regime_c_stabilization(e, b.theta_star, 0.8).pass);
}

TEST(Probe, WeiAtEquilibriumMatchesGamma) {
  const ModelSpec m = wei_model(vec({0.5, 0.7}));
  const AsymptoticsBundle b = compute_asymptotics(m);
  const UrnState s = equilibrium_state(m, b.v_star, 1000);
  const CovarianceProbe pr = conditional_covariance_probe(m, s, 1000000, 21, false);
  const Matrix target = gamma_at_state(m, s, false);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      EXPECT_LE(std::abs(pr.covariance(i, j) - target(i, j)), 4 * pr.standard_error(i, j) + 1e-12);
    }
  }
  EXPECT_LE(relative_frobenius(target, b.Gamma), 1e-12);
}

TEST(Probe, BhsTwoArmsMatchesGammaTilde) {
  const ModelSpec m = bhs_model(vec({0.5, 0.7}));
  const AsymptoticsBundle b = compute_asymptotics(m);
  const UrnState s = equilibrium_state(m, b.v_star, 1000);
  const CovarianceProbe pr = conditional_covariance_probe(m, s, 400000, 22, true);
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      EXPECT_LE(std::abs(pr.covariance(i, j) - b.Gamma(i, j)), 4 * pr.standard_error(i, j) + 1e-12);
    }
  }
}

TEST(Probe, DegenerateCompositionFixesTheDraw) {
  const ModelSpec m = wei_model(vec({0.5, 0.7}));
  UrnState s = m.initial_state();
  s.n = 10;
  s.Y = vec({11, 0});
  s.w = 11;
  const CovarianceProbe pr = conditional_covariance_probe(m, s, 1000, 3, false);
  EXPECT_EQ(pr.covariance.block(2, 2, 2, 2).norm(), 0.0);
}

TEST(Probe, EnumeratedCovarianceMatchesClosedForm) {
  const ModelSpec m = bhs_model(vec({0.5, 0.6, 0.7}));
  const UrnState s = m.initial_state();
  const Matrix enumerated = enumerated_increment_covariance(m, s.Y, s.N, s.S, true);
  EXPECT_LE((enumerated - gamma_at_state(m, s, true)).norm(), 1e-14);
}

TEST(FiniteHorizon, ApproachesSigma) {
  const ModelSpec m = wei_model(vec({0.5, 0.7}));
  const AsymptoticsBundle b = compute_asymptotics(m);
  const double far = relative_frobenius(finite_horizon_covariance(b.Dh, b.Gamma, 100000), *b.Sigma);
  const double near = relative_frobenius(finite_horizon_covariance(b.Dh, b.Gamma, 1000), *b.Sigma);
  EXPECT_LT(far, near);
  EXPECT_LE(far, 0.02);
}

TEST(Remainders, WeightTermsDecayGeneratorTermPlateausBeyondTwoArms) {
  const ModelSpec m3 = bhs_model(vec({0.5, 0.6, 0.7}));
  const RemainderDecay r3 =
      remainder_decay(m3, run_replications(m3, {100000, 50, {1000, 10000, 100000}, 2718281828ULL, 0}));
  EXPECT_TRUE(r3.r_check_decreasing);
  // √n(H_n − H) has a nondegenerate limit, so n·E|r̄|² settles at a positive level.
  EXPECT_GT(r3.r_bar.back(), 0.01);
  EXPECT_LT(r3.r_bar.back(), 2.0 * r3.r_bar.front());

  const ModelSpec m2 = bhs_model(vec({0.5, 0.7}));
  const RemainderDecay r2 =
      remainder_decay(m2, run_replications(m2, {100000, 50, {1000, 10000, 100000}, 2718281828ULL, 0}));
  EXPECT_TRUE(r2.r_bar_decreasing);
  EXPECT_LT(r2.r_bar.back(), 1e-12);
}
