#include "urnsa/urn.hpp"

#include "urnsa/errors.hpp"
#include "urnsa/rng.hpp"

#include <algorithm>
#include <cmath>

namespace urnsa {

namespace {

constexpr double kNegativeMassTol = 1e-12;

// Index of the cell containing x ∈ (0, w] when Y is laid out left to right.
Eigen::Index locate(const Vector& Y, double x) {
  double cumulative = 0.0;
  Eigen::Index last_positive = -1;
  for (Eigen::Index j = 0; j < Y.size(); ++j) {
    if (Y(j) > 0.0) last_positive = j;
    cumulative += Y(j);
    if (Y(j) > 0.0 && x <= cumulative) return j;
  }
  // x can exceed the rounded cumulative total by an ulp when u = 1.
  return last_positive;
}

void enforce_tenability(UrnState& state) {
  const double scale = std::max(1.0, std::abs(state.w));
  for (Eigen::Index i = 0; i < state.Y.size(); ++i) {
    if (state.Y(i) < 0.0) {
      if (state.Y(i) < -kNegativeMassTol * scale) {
        throw TenabilityError("removal left a negative mass of type " + std::to_string(i + 1));
      }
      state.Y(i) = 0.0;
    }
  }
}

}  // namespace

Checkpoint make_checkpoint(const UrnState& state) {
  return {state.n, state.y_tilde(), state.n_tilde(), state.s_tilde(), state.pi(), state.w};
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::extinct: return "extinct";
    case RunStatus::untenable: return "untenable";
  }
  return "unknown";
}

Eigen::Index draw(const Vector& Y, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw InputError("draw: u must lie in (0, 1]");
  if ((Y.array() < 0.0).any()) throw InputError("draw: composition has a negative entry");
  const double w = Y.sum();
  if (!(w > 0.0)) throw ExtinctionError("draw: urn weight is zero");
  return locate(Y, u * w);
}

StepResult step(const UrnState& state, const ModelSpec& model, double u, int outcome) {
  if (state.dim() != model.dim()) throw InputError("step: state and model dimensions differ");
  const Eigen::Index arm = draw(state.Y, u);
  if (outcome < 0 || outcome >= model.outcome_count(arm)) {
    throw InputError("step: outcome index out of range for the drawn arm");
  }

  StepResult result;
  StepRecord& rec = result.record;
  rec.drawn_arm = arm;
  rec.outcome = outcome;
  rec.D_column = model.addition_column(arm, outcome, state);
  rec.H_next = model.generating_matrix(state);
  rec.delta_M = rec.D_column - rec.H_next * state.Y / state.w;
  if (state.n >= 1) {
    const Vector yt = state.y_tilde();
    const double n = static_cast<double>(state.n);
    rec.remainder = (n / state.w - 1.0) * (rec.H_next * yt) + (rec.H_next - model.limit_H()) * yt;
  }

  UrnState& next = result.state;
  next = state;
  next.Y += rec.D_column;
  next.N(arm) += 1.0;
  next.S(arm) += model.success_increment(outcome);
  next.n += 1;
  next.w = next.Y.sum();
  if (model.kind() == ModelKind::removal) enforce_tenability(next);
  return result;
}

Eigen::Index advance(UrnState& state, const ModelSpec& model, double u, double v,
                     Vector& scratch) {
  if (!(state.w > 0.0)) throw ExtinctionError("urn weight reached zero");
  const Eigen::Index arm = locate(state.Y, u * state.w);
  const int outcome = model.sample_outcome(arm, v);
  model.addition_column(arm, outcome, state, scratch);
  state.Y += scratch;
  state.N(arm) += 1.0;
  state.S(arm) += model.success_increment(outcome);
  state.n += 1;
  state.w = state.Y.sum();
  if (model.kind() == ModelKind::removal) {
    enforce_tenability(state);
    state.w = state.Y.sum();
  }
  return arm;
}

Trajectory simulate(const ModelSpec& model, std::int64_t horizon, std::uint64_t seed,
                    const std::vector<std::int64_t>& checkpoints, std::uint64_t stream,
                    SimulationOptions options) {
  if (horizon < 0) throw InputError("simulate: horizon must be nonnegative");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (checkpoints[k] < 0 || checkpoints[k] > horizon) {
      throw InputError("simulate: checkpoint outside [0, horizon]");
    }
    if (k > 0 && checkpoints[k] <= checkpoints[k - 1]) {
      throw InputError("simulate: checkpoints must be strictly increasing");
    }
  }

  Trajectory traj;
  traj.model = model.kind();
  traj.seed = seed;
  traj.stream = stream;
  traj.initial = model.initial_state();

  UrnState state = traj.initial;
  if (horizon == 0) {
    traj.checkpoints.push_back(make_checkpoint(state));
    return traj;
  }

  StreamRng rng(seed, stream);
  Vector scratch(model.dim());
  std::size_t next_cp = 0;
  auto record_due = [&] {
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == state.n) {
      traj.checkpoints.push_back(make_checkpoint(state));
      ++next_cp;
    }
  };

  try {
    record_due();
    while (state.n < horizon) {
      const double u = rng.uniform_open_closed();
      const double v = rng.uniform01();
      if (options.record_steps) {
        const Eigen::Index arm = draw(state.Y, u);
        StepResult r = step(state, model, u, model.sample_outcome(arm, v));
        state = std::move(r.state);
        traj.steps.push_back(std::move(r.record));
      } else {
        advance(state, model, u, v, scratch);
      }
      record_due();
    }
  } catch (const ExtinctionError& e) {
    traj.status = RunStatus::extinct;
    traj.message = e.what();
  } catch (const TenabilityError& e) {
    traj.status = RunStatus::untenable;
    traj.message = e.what();
  }
  traj.steps_done = state.n;
  return traj;
}

SaDecomposition sa_decompose(const StepRecord& record, const UrnState& state,
                             const ModelSpec& model) {
  if (state.n < 1) throw InputError("sa_decompose: the recursion is defined for n ≥ 1");
  const Eigen::Index d = model.dim();
  const Vector yt = state.y_tilde();
  const double n = static_cast<double>(state.n);

  SaDecomposition out;
  out.mean_field = -(Matrix::Identity(d, d) - model.limit_H()) * yt;
  out.martingale = record.D_column - record.H_next * state.Y / state.w;
  out.remainder = (n / state.w - 1.0) * (record.H_next * yt) +
                  (record.H_next - model.limit_H()) * yt;

  const Vector increment = (state.Y + record.D_column) / (n + 1.0) - yt;
  const Vector rebuilt = (out.mean_field + out.martingale + out.remainder) / (n + 1.0);
  const double scale = std::max({1.0, yt.norm(), record.D_column.norm() / (n + 1.0)});
  if ((increment - rebuilt).norm() > 1e-12 * scale) {
    throw NumericalError("sa_decompose: terms do not reconstruct the increment");
  }
  return out;
}

TheoremRemainders theorem_remainders(const UrnState& state, const ModelSpec& model,
                                     const Matrix& H_next) {
  const Vector yt = state.y_tilde();
  const double wt = yt.sum();
  const double sq = (wt - 1.0) * (wt - 1.0) / wt;
  const Matrix& H = model.limit_H();

  TheoremRemainders out;
  out.r_bar = ((H_next - H) / wt + sq * H) * yt;
  out.r_tilde = sq * yt;
  out.r_check = sq * (H_next * yt);
  out.r_hat = model.bernoulli_responses() ? Vector(sq * model.p().cwiseProduct(yt))
                                          : Vector(Vector::Zero(yt.size()));
  return out;
}

}  // namespace urnsa
