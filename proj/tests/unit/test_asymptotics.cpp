#include "urnsa/asymptotics.hpp"
#include "urnsa/errors.hpp"
#include "urnsa/spectral.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace urnsa;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

std::vector<double> sorted_real(const spectral::ComplexSpectrum& s) {
  std::vector<double> out;
  for (const auto& z : s) out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Regime, WeiExamples) {
  RegimeInfo a = classify_regime(wei_matrix(vec({0.5, 0.7})));
  EXPECT_EQ(a.regime, Regime::a);
  EXPECT_NEAR(a.lambda_max.real(), 0.2, 1e-12);
  EXPECT_FALSE(a.beta);
  RegimeInfo b = classify_regime(wei_matrix(vec({0.7, 0.8})));
  EXPECT_EQ(b.regime, Regime::b);
  RegimeInfo c = classify_regime(wei_matrix(vec({0.9, 0.8})));
  EXPECT_EQ(c.regime, Regime::c);
  ASSERT_TRUE(c.beta);
  EXPECT_NEAR(*c.beta, 0.3, 1e-12);
}

TEST(Regime, UnbalancedMatrixRejected) {
  EXPECT_THROW(classify_regime(0.5 * wei_matrix(vec({0.5, 0.7}))), BalanceError);
}

TEST(DhStar, SpectrumAndBlocks) {
  const Vector p = vec({0.5, 0.7});
  const Matrix H = wei_matrix(p);
  const Vector v = wei_v_star(p);
  const Matrix Dh = dh_star(H, v);
  const auto s = sorted_real(spectral::spectrum(Dh));
  EXPECT_NEAR(s[0], 0.8, 1e-12);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(s[k], 1.0, 1e-12);
  EXPECT_EQ(Dh.bottomRightCorner(2, 2), Matrix(Matrix::Identity(2, 2)));
  Vector theta(4);
  theta << v, v;
  EXPECT_LE(mean_field(H, theta).norm(), 1e-15);
}

TEST(DhStar, MatchesFiniteDifferencesOfMeanField) {
  const Vector p = vec({0.5, 0.6, 0.7});
  const Matrix H = wei_matrix(p);
  const Vector v = wei_v_star(p);
  Vector theta(6);
  theta << v, v;
  const Matrix Dh = dh_star(H, v);
  const double h = 1e-6;
  for (int k = 0; k < 6; ++k) {
    Vector up = theta, dn = theta;
    up(k) += h;
    dn(k) -= h;
    const Vector col = (mean_field(H, up) - mean_field(H, dn)) / (2 * h);
    EXPECT_LE((col - Dh.col(k)).norm(), 1e-8) << k;
  }
}

TEST(GammaBlocks, CovarianceOfDrawnArm) {
  const Vector p = vec({0.5, 0.7});
  const Vector v = wei_v_star(p);
  std::vector<Matrix> C(2);
  C[0] = Matrix::Zero(2, 2);
  C[0](0, 0) = p(0);
  C[0](1, 1) = 1 - p(0);
  C[1] = Matrix::Zero(2, 2);
  C[1](0, 0) = 1 - p(1);
  C[1](1, 1) = p(1);
  const Matrix G = gamma_blocks(wei_matrix(p), v, C);
  const Matrix G22 = G.bottomRightCorner(2, 2);
  EXPECT_NEAR(G22(0, 0), 0.234375, 1e-15);
  EXPECT_NEAR(G22(0, 1), -0.234375, 1e-15);
  EXPECT_LE((G22 * Vector::Ones(2)).norm(), 1e-15);
  EXPECT_TRUE(spectral::is_psd(G));
}

TEST(BhsSecondMoments, TwoArmExample) {
  const auto C = c_matrices_bhs(vec({0.5, 0.7}));
  EXPECT_NEAR(C[0](0, 0), 0.5, 1e-15);
  EXPECT_NEAR(C[0](1, 1), 0.5, 1e-15);
  EXPECT_NEAR(C[0](0, 1), 0.0, 0.0);
  for (const auto& Ck : c_matrices_bhs(vec({0.5, 0.6, 0.7}))) EXPECT_TRUE(spectral::is_psd(Ck));
  const auto C3 = c_matrices_bhs(vec({0.5, 0.6, 0.7}));
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 3; ++j) {
      if (j != k) EXPECT_EQ(C3[k](k, j), 0.0);
    }
  }
}

TEST(Dphi, VanishesAtTwoArms) {
  const auto J = dphi_y(vec({0.3, 0.9}), vec({1.2, 2.5}), vec({0.4, 0.6}), vec({0.5, 0.7}));
  EXPECT_LE(J.J_s.norm(), 1e-15);
  EXPECT_LE(J.J_nu.norm(), 1e-15);
}

TEST(Dphi, RightMultiplicationIdentityAtEquilibrium) {
  const Vector p = vec({0.5, 0.6, 0.7});
  const Vector v = bhs_v_star(p);
  const auto J = dphi_y(p.cwiseProduct(v), v, v, p);
  EXPECT_LE((J.J_nu + J.J_s * p.asDiagonal()).norm(), 1e-14);
}

TEST(Dphi, MatchesFiniteDifferences) {
  const Vector p = vec({0.4, 0.65, 0.8});
  const Vector s = vec({0.3, 0.5, 0.2}), nu = vec({0.9, 1.4, 0.7}), y = vec({0.2, 0.5, 0.3});
  const auto J = dphi_y(s, nu, y, p);
  const double h = 1e-6;
  for (int k = 0; k < 3; ++k) {
    Vector su = s, sd = s, nu_u = nu, nu_d = nu;
    su(k) += h;
    sd(k) -= h;
    nu_u(k) += h;
    nu_d(k) -= h;
    EXPECT_LE(((phi(su, nu, p) - phi(sd, nu, p)) * y / (2 * h) - J.J_s.col(k)).norm(), 1e-8);
    EXPECT_LE(((phi(s, nu_u, p) - phi(s, nu_d, p)) * y / (2 * h) - J.J_nu.col(k)).norm(), 1e-8);
  }
}

TEST(DhTilde, BlocksAndDeterminant) {
  const Vector p = vec({0.5, 0.7});
  const Matrix H = bhs_limit_matrix(p);
  const Vector v = bhs_v_star(p);
  const Matrix D = dh_tilde_star(H, v, p);
  EXPECT_EQ(D.block(2, 2, 2, 2), Matrix(Matrix::Identity(2, 2)));
  EXPECT_EQ(D.block(4, 4, 2, 2), Matrix(Matrix::Identity(2, 2)));
  const Matrix lower_left = p.asDiagonal() * (v * Vector::Ones(2).transpose() - Matrix::Identity(2, 2));
  EXPECT_LE((D.block(4, 0, 2, 2) - lower_left).norm(), 1e-15);
  const double target = (Matrix::Identity(2, 2) - H + v * Vector::Ones(2).transpose()).determinant();
  EXPECT_NEAR(D.determinant(), target, 1e-10 * std::abs(target));
}

TEST(GammaTilde, SharesTheoremTwoBlock) {
  const Vector p = vec({0.5, 0.6, 0.7});
  const Matrix H = bhs_limit_matrix(p);
  const Vector v = bhs_v_star(p);
  const Matrix G = gamma_tilde(H, v, p);
  const Matrix expect = H * (Matrix(v.asDiagonal()) - v * v.transpose());
  EXPECT_LE((G.block(0, 3, 3, 3) - expect).norm(), 1e-15);
  EXPECT_TRUE(spectral::is_psd(G));
}

TEST(GammaTilde, SuccessBlockAtCertainSuccess) {
  // p → 1: the success increment equals the draw indicator.
  const Vector p = vec({0.5, 0.7});
  const Vector v = bhs_v_star(p);
  const Matrix G = gamma_tilde(bhs_limit_matrix(p), v, Vector::Ones(2));
  EXPECT_LE((G.block(4, 4, 2, 2) - (Matrix(v.asDiagonal()) - v * v.transpose())).norm(), 1e-15);
}

TEST(SigmaStar, ScalarAndQuadrature) {
  const Matrix S = sigma_star(Matrix::Constant(1, 1, 1.5), Matrix::Constant(1, 1, 3.0));
  EXPECT_NEAR(S(0, 0), 3.0 / (2.0 * 1.0), 1e-15);
  const Vector p = vec({0.5, 0.7});
  const Matrix H = wei_matrix(p);
  const Vector v = wei_v_star(p);
  const Matrix Dh = dh_star(H, v);
  const ModelSpec m = wei_model(p);
  const AsymptoticsBundle b = compute_asymptotics(m);
  const Matrix M = Dh - 0.5 * Matrix::Identity(4, 4);
  const double T = spectral::suggested_quadrature_horizon(M);
  const auto q = spectral::sigma_by_quadrature(M, b.Gamma, T, spectral::suggested_quadrature_steps(M, T));
  EXPECT_LE(relative_frobenius(q.standard, *b.Sigma), 1e-6);
  EXPECT_LE(*b.quadrature_rel_error, 1e-6);
}

TEST(GammaH, ZeroAtTwoArms) {
  const AsymptoticsBundle b = compute_asymptotics(bhs_model(vec({0.5, 0.7})));
  ASSERT_TRUE(b.Gamma_H);
  EXPECT_EQ(b.Gamma_H->norm(), 0.0);
}

TEST(GammaH, ConstantEntriesHaveZeroRows) {
  const AsymptoticsBundle b = compute_asymptotics(bhs_model(vec({0.5, 0.6, 0.7})));
  ASSERT_TRUE(b.Gamma_H);
  EXPECT_GT(b.Gamma_H->norm(), 0.0);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_EQ(b.Gamma_H->row(i + 3 * i).norm(), 0.0);
  EXPECT_EQ(gamma_h_support(3).size(), 6u);
  EXPECT_TRUE(spectral::is_psd(*b.Gamma_H));
}

TEST(Bundle, WeiAndBhsShapes) {
  const AsymptoticsBundle w = compute_asymptotics(wei_model(vec({0.5, 0.7})));
  EXPECT_FALSE(w.extended);
  EXPECT_EQ(w.Dh.rows(), 4);
  EXPECT_NEAR(w.v_star(0), 0.375, 1e-15);
  EXPECT_FALSE(w.Gamma_H);
  const AsymptoticsBundle b = compute_asymptotics(bhs_model(vec({0.5, 0.6, 0.7})));
  EXPECT_TRUE(b.extended);
  EXPECT_EQ(b.Dh.rows(), 9);
  ASSERT_TRUE(b.Sigma);
  EXPECT_TRUE(spectral::is_psd(*b.Sigma));
  EXPECT_EQ(b.assumptions.status("A5"), AssumptionStatus::fails);
}

TEST(Bundle, SigmaOmittedOutsideRegimeA) {
  const AsymptoticsBundle b = compute_asymptotics(wei_model(vec({0.7, 0.8})));
  EXPECT_FALSE(b.Sigma);
  EXPECT_EQ(b.sigma_omitted_reason, "regime_b");
  const AsymptoticsBundle c = compute_asymptotics(wei_model(vec({0.9, 0.8})));
  EXPECT_FALSE(c.Sigma);
  EXPECT_EQ(c.sigma_omitted_reason, "regime_c");
}

TEST(Bundle, ReducibleDesignRejected) {
  std::vector<ColumnDistribution> cols = {{{1.0, vec({1, 0})}}, {{1.0, vec({0, 1})}}};
  EXPECT_THROW(compute_asymptotics(homogeneous_model(cols, 1.0)), InputError);
}
