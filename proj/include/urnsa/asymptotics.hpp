#pragma once

// Limit objects of the central limit theorems: equilibrium, mean-field
// Jacobians, increment covariances and the asymptotic covariances.

#include "urnsa/linalg.hpp"
#include "urnsa/models.hpp"
#include "urnsa/spectral.hpp"
#include "urnsa/state.hpp"

#include <optional>
#include <string>
#include <vector>

namespace urnsa {

enum class Regime { a, b, c };
std::string to_string(Regime regime);

struct RegimeInfo {
  Regime regime = Regime::a;
  Complex lambda_max;                  // eigenvalue of H other than 1 with largest real part
  double Lambda = 0.0;                 // 1 − Re λ_max
  std::optional<double> beta;          // 1 − Re λ_max, regime c only
  spectral::ComplexSpectrum spectrum;  // Sp(H)
};

/// Regime from the spectral gap of H. Throws BalanceError when 1 is not an
/// eigenvalue (to 1e−8). Re λ_max within 1e−10 of 1/2 counts as regime b.
RegimeInfo classify_regime(const Matrix& H);

/// Jacobian of the (ỹ, ñ) mean field at (v*, v*).
Matrix dh_star(const Matrix& H, const Vector& v_star);

/// Mean field h(y, ν) of the (Ỹ, Ñ) recursion; theta = (y, ν).
Vector mean_field(const Matrix& H, const Vector& theta);

/// Mean field of the (Ỹ, Ñ, S̃) recursion for the BHS design; theta = (y, ν, s).
Vector mean_field_extended(const Vector& p, const Vector& theta);

/// 2d×2d covariance of the stacked increments (ΔM, ΔM̃) at equilibrium.
Matrix gamma_blocks(const Matrix& H, const Vector& v_star, const std::vector<Matrix>& C);

/// Limits C^k of the BHS second moments.
std::vector<Matrix> c_matrices_bhs(const Vector& p);

struct PhiJacobians {
  Matrix J_s;   // ∂(Φ(s,ν)y)/∂s
  Matrix J_nu;  // ∂(Φ(s,ν)y)/∂ν
};

/// Jacobians of (s, ν) ↦ Φ(s, ν)·y with y held fixed.
PhiJacobians dphi_y(const Vector& s, const Vector& nu, const Vector& y, const Vector& p);

/// Jacobian of the extended mean field at (v*, v*, diag(p)v*).
Matrix dh_tilde_star(const Matrix& H, const Vector& v_star, const Vector& p);

/// 3d×3d covariance of the stacked increments (ΔM, ΔM̃, ΔM̂) at equilibrium.
Matrix gamma_tilde(const Matrix& H, const Vector& v_star, const Vector& p);

/// Σ solving (Dh − I/2)Σ + Σ(Dh − I/2)ᵀ = Γ. Throws StabilityError outside regime a.
Matrix sigma_star(const Matrix& Dh, const Matrix& Gamma);

/// d²×d² asymptotic covariance of √n·vec(H_n − H) (column-major vec).
Matrix gamma_H(const Vector& p, const Vector& v_star, const Matrix& Sigma_tilde);

/// Column-major vec indices of the entries Φ^{ij}, i ≠ j, the only ones
/// that vary (the diagonal is the constant p^i).
std::vector<Eigen::Index> gamma_h_support(Eigen::Index d);

/// Conditional covariance of (ΔM, ΔM̃) at `state`, or of (ΔM, ΔM̃, ΔM̂) when
/// `extended` (Bernoulli designs only).
Matrix gamma_at_state(const ModelSpec& model, const UrnState& state, bool extended);

/// Everything the report needs for one model.
struct AsymptoticsBundle {
  ModelKind kind = ModelKind::wei;
  bool extended = false;  // 3d objects (y, ν, s) instead of 2d (y, ν)
  Matrix H;
  std::vector<Matrix> C;
  Vector v_star;
  Vector theta_star;
  RegimeInfo regime;
  Matrix Gamma;
  Matrix Dh;
  std::optional<Matrix> Sigma;
  std::string sigma_omitted_reason;  // "regime_b" or "regime_c" when Sigma is absent
  std::optional<double> quadrature_rel_error;
  std::optional<Matrix> Gamma_H;
  AssumptionReport assumptions;
};

/// Builds the bundle. BHS designs get the extended objects and Γ_H; the
/// other designs get the 2d objects. Throws InputError when (A3) fails or
/// the design is the removal variant.
AsymptoticsBundle compute_asymptotics(const ModelSpec& model);

}  // namespace urnsa
