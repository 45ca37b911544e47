#pragma once

// Exhaustive enumeration of the Wei and BHS urns at small horizons.
//
// The addition rules are implemented here a second time, independently of
// ModelSpec, so the enumeration can serve as ground truth for it.

#include "urnsa/linalg.hpp"
#include "urnsa/models.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace urnsa {

inline constexpr Eigen::Index kOracleMaxDim = 3;
inline constexpr int kOracleMaxHorizon = 8;

struct ExactOutcome {
  double probability = 0.0;
  std::optional<std::string> exact_probability;  // "num/den", rational mode only
  Vector Y, N, S, Pi;
  std::int64_t paths = 0;  // tree leaves merged into this outcome
};

struct ExactLaw {
  ModelKind kind = ModelKind::wei;
  int horizon = 0;
  bool rational = false;
  std::vector<ExactOutcome> outcomes;
  std::int64_t raw_paths = 0;  // leaves with positive probability before merging
  double total_mass = 0.0;
  bool mass_exact = false;     // rational mode and the weights sum to exactly 1
};

/// Merge key of a state: entries of (Y, N, S) rounded to multiples of `quantum`.
std::vector<std::int64_t> state_key(const Vector& Y, const Vector& N, const Vector& S,
                                    double quantum = 1e-12);

/// Law of (Y_n, N_n, S_n) after `horizon` draws from the model's initial state.
/// Exact rational weights when d = 2 and horizon ≤ 6, long double otherwise.
/// Throws OracleSizeError beyond d = 3 or horizon 8, InputError for designs
/// other than wei and bhs.
ExactLaw enumerate_exact(const ModelSpec& model, int horizon);

struct ExactMoments {
  Vector mean;        // E(Y, N, S), length 3d
  Matrix covariance;  // 3d×3d
};

ExactMoments exact_moments(const ExactLaw& law);

struct TreeIdentityReport {
  std::int64_t nodes = 0;
  double max_conditional_mean_residual = 0.0;  // max |E[DX | node] − H_{n+1}Y/w|
  double max_martingale_mean = 0.0;            // max |E[ΔM | node]| using the urn step
};

/// Checks the conditional-mean identity at every node of the tree up to depth
/// `horizon − 1` (all states from which a step is taken).
TreeIdentityReport check_tree_identities(const ModelSpec& model, int horizon);

/// Exact one-step covariance of (ΔM, ΔM̃) or (ΔM, ΔM̃, ΔM̂) at the given
/// state, by enumerating the drawn arm and the response.
Matrix enumerated_increment_covariance(const ModelSpec& model, const Vector& Y, const Vector& N,
                                       const Vector& S, bool extended);

}  // namespace urnsa
