#pragma once

// The urn state machine: drawing, composition update, trajectories and the
// stochastic-approximation decomposition of one step.

#include "urnsa/linalg.hpp"
#include "urnsa/models.hpp"
#include "urnsa/state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace urnsa {

/// What one step added and how it splits into compensator and martingale.
struct StepRecord {
  Eigen::Index drawn_arm = 0;
  int outcome = 0;      // response index used this step (1 = success for Bernoulli designs)
  Vector D_column;      // D_{n+1} X_{n+1}
  Vector delta_M;       // D_{n+1}X_{n+1} − H_{n+1} Y_n / w(Y_n)
  Vector remainder;     // r_{n+1}; empty when n = 0 (the normalized recursion starts at n = 1)
  Matrix H_next;        // H_{n+1}
};

struct Checkpoint {
  std::int64_t n = 0;
  Vector y_tilde;
  Vector n_tilde;
  Vector s_tilde;
  Vector pi;
  double w = 0.0;  // w(Y_n), unnormalized
};

Checkpoint make_checkpoint(const UrnState& state);

enum class RunStatus { completed, extinct, untenable };
std::string to_string(RunStatus status);

struct Trajectory {
  ModelKind model = ModelKind::wei;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  UrnState initial;
  std::vector<Checkpoint> checkpoints;
  RunStatus status = RunStatus::completed;
  std::string message;
  std::int64_t steps_done = 0;
  std::vector<StepRecord> steps;  // only filled with SimulationOptions::record_steps
};

/// Index j with Σ_{ℓ<j} Y^ℓ/w(Y) < u ≤ Σ_{ℓ≤j} Y^ℓ/w(Y), u ∈ (0,1].
Eigen::Index draw(const Vector& Y, double u);

struct StepResult {
  UrnState state;
  StepRecord record;
};

/// One urn update Y' = Y + D·X with the drawn arm fixed by `u` and the
/// response by `outcome`.
StepResult step(const UrnState& state, const ModelSpec& model, double u, int outcome);

/// In-place update used by the simulation loops. `scratch` must have size d.
/// Returns the drawn arm.
Eigen::Index advance(UrnState& state, const ModelSpec& model, double u, double v,
                     Vector& scratch);

struct SimulationOptions {
  bool record_steps = false;  // keep every StepRecord (debug; memory grows with horizon)
};

/// Simulates `horizon` steps from the model's initial state using stream
/// `stream` of `seed`, recording the normalized state at each checkpoint.
/// Extinction or a tenability violation stops the run and is reported in
/// `status` / `message`.
Trajectory simulate(const ModelSpec& model, std::int64_t horizon, std::uint64_t seed,
                    const std::vector<std::int64_t>& checkpoints, std::uint64_t stream = 0,
                    SimulationOptions options = {});

struct SaDecomposition {
  Vector mean_field;  // −(I − H) Ỹ_n
  Vector martingale;  // ΔM_{n+1}
  Vector remainder;   // r_{n+1}
};

/// Splits Ỹ_{n+1} − Ỹ_n = (mean_field + martingale + remainder)/(n+1) for a
/// step taken at `state` (n ≥ 1). Throws NumericalError when the three
/// terms fail to reconstruct the increment to 1e−12 relative.
SaDecomposition sa_decompose(const StepRecord& record, const UrnState& state,
                             const ModelSpec& model);

struct TheoremRemainders {
  Vector r_bar;    // ((H_{n+1} − H)/w(Ỹ) + (w(Ỹ)−1)²/w(Ỹ)·H) Ỹ
  Vector r_tilde;  // (w(Ỹ)−1)²/w(Ỹ)·Ỹ
  Vector r_check;  // (w(Ỹ)−1)²/w(Ỹ)·H_{n+1} Ỹ
  Vector r_hat;    // diag(p)(w(Ỹ)−1)²/w(Ỹ)·Ỹ; zero for non-Bernoulli designs
};

TheoremRemainders theorem_remainders(const UrnState& state, const ModelSpec& model,
                                     const Matrix& H_next);

}  // namespace urnsa
