#include "urnsa/errors.hpp"
#include "urnsa/models.hpp"
#include "urnsa/spectral.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace urnsa;
using namespace urnsa::spectral;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

std::vector<double> sorted_real(const ComplexSpectrum& s) {
  std::vector<double> out;
  for (const auto& z : s) {
    EXPECT_NEAR(z.imag(), 0.0, 1e-12);
    out.push_back(z.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Perron, SwapMatrixGivesUniformVector) {
  Matrix H(2, 2);
  H << 0, 1, 1, 0;
  const PerronResult r = perron_vector(H);
  EXPECT_NEAR(r.v(0), 0.5, 1e-12);
  EXPECT_NEAR(r.v(1), 0.5, 1e-12);
  EXPECT_NEAR(r.eigenvalue, 1.0, 1e-12);
}

TEST(Perron, WeiTwoArms) {
  Matrix H(2, 2);
  H << 0.5, 0.3, 0.5, 0.7;
  const PerronResult r = perron_vector(H);
  EXPECT_NEAR(r.v(0), 0.375, 1e-12);
  EXPECT_NEAR(r.v(1), 0.625, 1e-12);
  EXPECT_LE((H * r.v - r.v).norm(), 1e-12);
}

TEST(Perron, WeiThreeArms) {
  const PerronResult r = perron_vector(wei_matrix(vec({0.5, 0.6, 0.7})));
  EXPECT_NEAR(r.v(0), 12.0 / 47.0, 1e-11);
  EXPECT_NEAR(r.v(1), 15.0 / 47.0, 1e-11);
  EXPECT_NEAR(r.v(2), 20.0 / 47.0, 1e-11);
}

TEST(Perron, IterationLimitCarriesResidual) {
  Matrix H(2, 2);
  H << 0.5, 0.3, 0.5, 0.7;
  try {
    perron_vector(H, 1e-300, 3);
    FAIL() << "expected IterationLimitError";
  } catch (const IterationLimitError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(Spectrum, Identity) {
  const auto s = sorted_real(spectrum(Matrix::Identity(3, 3)));
  for (double x : s) EXPECT_NEAR(x, 1.0, 1e-14);
  EXPECT_EQ(s.size(), 3u);
}

TEST(Spectrum, WeiTwoByTwoRule) {
  auto s = sorted_real(spectrum(wei_matrix(vec({0.5, 0.7}))));
  EXPECT_NEAR(s[0], 0.2, 1e-12);
  EXPECT_NEAR(s[1], 1.0, 1e-12);
  s = sorted_real(spectrum(wei_matrix(vec({0.9, 0.8}))));
  EXPECT_NEAR(s[0], 0.7, 1e-12);
  EXPECT_NEAR(s[1], 1.0, 1e-12);
}

TEST(Spectrum, ComplexPairsAreConjugateAdjacent) {
  Matrix R(2, 2);
  R << 0, -1, 1, 0;
  const auto s = spectrum(R);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0].imag(), 1.0, 1e-12);
  EXPECT_NEAR(s[1].imag(), -1.0, 1e-12);
}

TEST(Spectrum, MatchesEigenOnRandomMatrix) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix A(6, 6);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = u(rng);
  auto mine = spectrum(A);
  Eigen::EigenSolver<Matrix> es(A);
  auto ref = std::vector<Complex>(es.eigenvalues().data(), es.eigenvalues().data() + 6);
  auto less = [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  };
  std::sort(mine.begin(), mine.end(), less);
  std::sort(ref.begin(), ref.end(), less);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_LE(std::abs(mine[k] - ref[k]), 1e-10);
}

TEST(Lyapunov, Scalar) {
  const Matrix S = lyapunov_solve(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0));
  EXPECT_NEAR(S(0, 0), 1.0, 1e-14);
}

TEST(Lyapunov, DiagonalCase) {
  Matrix M = Matrix::Zero(2, 2);
  M(0, 0) = 0.7;
  M(1, 1) = 1.9;
  Matrix G(2, 2);
  G << 1.0, 0.3, 0.3, 2.0;
  const Matrix S = lyapunov_solve(M, G);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(S(i, j), G(i, j) / (M(i, i) + M(j, j)), 1e-14);
  }
}

TEST(Lyapunov, RejectsUnstableOperator) {
  Matrix M = Matrix::Identity(2, 2);
  M(1, 1) = -0.1;
  EXPECT_THROW(lyapunov_solve(M, Matrix::Identity(2, 2)), StabilityError);
}

TEST(MatrixExp, ZeroAndDiagonal) {
  EXPECT_LE((matrix_exp(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm(), 1e-15);
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1;
  A(1, 1) = -1;
  const Matrix E = matrix_exp(A);
  EXPECT_NEAR(E(0, 0), std::exp(1.0), 1e-13);
  EXPECT_NEAR(E(1, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(E(0, 1), 0.0, 1e-15);
}

TEST(MatrixExp, InverseIdentityOnRandomMatrix) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Matrix A(4, 4);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  EXPECT_LE((matrix_exp(A) * matrix_exp(-A) - Matrix::Identity(4, 4)).norm(), 1e-10);
}

TEST(Quadrature, ScalarCase) {
  const auto q = sigma_by_quadrature(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0), 40.0, 4000);
  EXPECT_NEAR(q.standard(0, 0), 1.0, 1e-8);
  EXPECT_TRUE(q.tail_ok);
}

TEST(Quadrature, MatchesLyapunovOnNonNormalOperator) {
  Matrix M(3, 3);
  M << 1.0, 0.4, 0.0, -0.2, 0.8, 0.5, 0.1, 0.0, 1.5;
  Matrix B(3, 3);
  B << 1, 0.2, 0, 0.1, 1, 0.3, 0, 0.4, 1;
  const Matrix G = B * B.transpose();
  const auto q = sigma_by_quadrature(M, G, suggested_quadrature_horizon(M), 4000);
  EXPECT_LE(relative_frobenius(q.standard, lyapunov_solve(M, G)), 1e-6);
  EXPECT_LE(relative_frobenius(q.transposed, lyapunov_solve(M.transpose(), G)), 1e-6);
}

TEST(Structure, PsdAndIrreducibility) {
  Matrix P(2, 2);
  P << 1, 1, 1, 1;
  EXPECT_TRUE(is_psd(P));
  P(1, 1) = 0.5;
  EXPECT_FALSE(is_psd(P));
  EXPECT_FALSE(is_irreducible(Matrix::Identity(2, 2)));
  EXPECT_TRUE(is_irreducible(wei_matrix(vec({0.5, 0.7}))));
}
