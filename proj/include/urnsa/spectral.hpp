#pragma once

// Small dense kernels: Perron vector, eigenvalues, Lyapunov equation,
// matrix exponential and a quadrature route to the asymptotic covariance.

#include "urnsa/linalg.hpp"

#include <vector>

namespace urnsa::spectral {

using ComplexSpectrum = std::vector<Complex>;

/// Largest dimension accepted by `spectrum`.
inline constexpr Eigen::Index kMaxSpectrumDim = 32;

struct PerronResult {
  Vector v;            // positive, sums to 1
  double eigenvalue;   // the common column sum c
  double residual;     // ‖Hv − c·v‖₂
  int iterations;
};

/// Normalized right Perron eigenvector of a balanced nonnegative matrix.
///
/// Runs the power method on the lazy matrix (I + H/c)/2, renormalizing to
/// unit weight after every product; the lazy shift removes periodicity so
/// the iteration converges for every irreducible H. Starts from the uniform
/// vector. Throws IterationLimitError (carrying the last residual) when the
/// residual is still above `tol` after `max_iter` products.
PerronResult perron_vector(const Matrix& H, double tol = 1e-12, int max_iter = 200000);

/// All eigenvalues of a real square matrix, d ≤ 32.
///
/// Householder reduction to upper Hessenberg form followed by the
/// Francis double-shift QR iteration. Complex pairs are returned
/// conjugate-adjacent (positive imaginary part first).
ComplexSpectrum spectrum(const Matrix& A);

/// Eigenvector for a (numerically exact) eigenvalue, by inverse iteration
/// with a tiny shift. Normalized to unit Euclidean norm.
Eigen::VectorXcd eigenvector(const Matrix& A, Complex lambda);

/// Unique Σ with M·Σ + Σ·Mᵀ = G, through the Kronecker-vectorized system.
/// Requires every eigenvalue of M to have a strictly positive real part.
Matrix lyapunov_solve(const Matrix& M, const Matrix& G);

/// exp(A) by scaling and squaring with a [6/6] Padé approximant.
Matrix matrix_exp(const Matrix& A);

struct QuadratureResult {
  Matrix standard;    // ∫ e^{−Mu} G e^{−Mᵀu} du   (solves MΣ + ΣMᵀ = G)
  Matrix transposed;  // ∫ (e^{−Mu})ᵀ G e^{−Mu} du (solves MᵀΣ + ΣM = G)
  double tail_norm;   // ‖e^{−M·horizon}‖₂
  bool tail_ok;       // tail_norm ≤ 1e−8
};

/// Composite Simpson approximation of the two integral forms of the
/// asymptotic covariance on [0, horizon]. `steps` is rounded up to even.
QuadratureResult sigma_by_quadrature(const Matrix& M, const Matrix& G, double horizon,
                                     int steps);

/// Horizon T with ‖e^{−M·T}‖ small enough for `sigma_by_quadrature`,
/// derived from the slowest decay rate of M.
double suggested_quadrature_horizon(const Matrix& M);

/// Even Simpson step count for `sigma_by_quadrature` on [0, horizon], scaled
/// to the fastest mode of M (at least 4000).
int suggested_quadrature_steps(const Matrix& M, double horizon);

bool is_symmetric(const Matrix& A, double tol = 1e-12);

/// Smallest eigenvalue of the symmetric part of A.
double min_symmetric_eigenvalue(const Matrix& A);

/// Symmetric and smallest eigenvalue ≥ −rel_tol·max(1, ‖A‖_F).
bool is_psd(const Matrix& A, double rel_tol = 1e-10);

/// Directed graph i → j whenever A(i,j) ≠ 0 is strongly connected.
bool is_irreducible(const Matrix& A);

}  // namespace urnsa::spectral
