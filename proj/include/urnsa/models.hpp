#pragma once

// Concrete urn designs and the assumption checkers.

#include "urnsa/linalg.hpp"
#include "urnsa/state.hpp"

#include <optional>
#include <string>
#include <vector>

namespace urnsa {

enum class ModelKind { wei, bhs, homogeneous, removal };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// One support point of a column law: with probability `probability` the
/// drawn arm adds `column` to the urn.
struct ColumnOutcome {
  double probability = 0.0;
  Vector column;
};
using ColumnDistribution = std::vector<ColumnOutcome>;

/// Initial (Y₀, N₀, S₀). Defaults: Y₀ = 𝟙/d, N₀ = S₀ = 𝟙.
struct InitialComposition {
  Vector y0;
  Vector n0;
  Vector s0;
};

InitialComposition default_initial(Eigen::Index d);

/// An immutable urn design. Build through the factory functions below.
///
/// Responses are encoded as an outcome index per draw: for the Bernoulli
/// designs (wei, bhs) outcome 1 is a success and 0 a failure; for the
/// column-distribution designs it is the index of the sampled support point.
class ModelSpec {
 public:
  ModelKind kind() const { return kind_; }
  Eigen::Index dim() const { return d_; }

  /// Success probabilities (wei, bhs); empty otherwise.
  const Vector& p() const { return p_; }
  /// Column laws after balance normalization (homogeneous, removal).
  const std::vector<ColumnDistribution>& columns() const { return columns_; }
  /// Balance constant supplied at construction, before normalization.
  double input_balance() const { return input_balance_; }
  /// Lattice constants c_i of the removal variant; empty otherwise.
  const Vector& lattice() const { return lattice_; }

  const InitialComposition& initial() const { return init_; }
  UrnState initial_state() const;

  /// Limit generating matrix H (columns sum to 1).
  const Matrix& limit_H() const { return limit_H_; }
  /// Limits C^j of E[D^{·j}(D^{·j})ᵀ | F].
  const std::vector<Matrix>& limit_second_moments() const { return limit_C_; }
  /// Closed-form limit allocation when the design provides one (wei, bhs).
  const std::optional<Vector>& closed_form_v_star() const { return closed_v_; }

  bool bernoulli_responses() const {
    return kind_ == ModelKind::wei || kind_ == ModelKind::bhs;
  }

  /// Generating matrix H_{n+1} = E[D_{n+1} | F_n] at `state`.
  Matrix generating_matrix(const UrnState& state) const;

  int outcome_count(Eigen::Index arm) const;
  double outcome_probability(Eigen::Index arm, int outcome) const;
  /// Maps a uniform v ∈ [0,1) to an outcome of the drawn arm.
  int sample_outcome(Eigen::Index arm, double v) const;
  /// Success indicator contributed to S by this outcome (0 for non-Bernoulli designs).
  int success_increment(int outcome) const {
    return bernoulli_responses() && outcome == 1 ? 1 : 0;
  }

  /// Column D^{·arm}_{n+1} for the given outcome, written into `out`.
  void addition_column(Eigen::Index arm, int outcome, const UrnState& state,
                       Eigen::Ref<Vector> out) const;
  Vector addition_column(Eigen::Index arm, int outcome, const UrnState& state) const;

  /// E[D^{·arm}_{n+1} (D^{·arm}_{n+1})ᵀ | F_n] at `state`.
  Matrix column_second_moment(Eigen::Index arm, const UrnState& state) const;

 private:
  friend ModelSpec wei_model(const Vector&, std::optional<InitialComposition>);
  friend ModelSpec bhs_model(const Vector&, std::optional<InitialComposition>);
  friend ModelSpec make_column_model(ModelKind, const std::vector<ColumnDistribution>&, double,
                                     const Vector&, std::optional<InitialComposition>);

  ModelSpec() = default;

  ModelKind kind_ = ModelKind::wei;
  Eigen::Index d_ = 0;
  Vector p_;
  std::vector<ColumnDistribution> columns_;
  double input_balance_ = 1.0;
  Vector lattice_;
  InitialComposition init_;
  Matrix limit_H_;
  std::vector<Matrix> limit_C_;
  std::optional<Vector> closed_v_;
};

/// Wei design: a success on arm j adds one ball of type j, a failure adds
/// 1/(d−1) ball of every other type.
ModelSpec wei_model(const Vector& p, std::optional<InitialComposition> init = std::nullopt);

/// Bai–Hu–Shen design: a failure on arm j adds Π^i/Σ_{k≠j}Π^k balls of each
/// type i ≠ j, where Π = S/N are the running success proportions.
ModelSpec bhs_model(const Vector& p, std::optional<InitialComposition> init = std::nullopt);

/// Homogeneous design with i.i.d. addition columns. Every column mean must sum
/// to `balance` (c); columns and Y₀ are divided by c so the result is
/// balanced with c = 1.
ModelSpec homogeneous_model(const std::vector<ColumnDistribution>& columns, double balance,
                            std::optional<InitialComposition> init = std::nullopt);

/// Variant allowing removal of drawn balls (negative diagonal entries).
/// `lattice` holds the constants c_i of the arithmetic tenability condition.
ModelSpec removal_model(const std::vector<ColumnDistribution>& columns, double balance,
                        const Vector& lattice,
                        std::optional<InitialComposition> init = std::nullopt);

/// Wei generating matrix: diagonal p, off-diagonal q^j/(d−1).
Matrix wei_matrix(const Vector& p);
/// v*ⁱ ∝ 1/qⁱ.
Vector wei_v_star(const Vector& p);
/// BHS limit generating matrix Φ evaluated at Π = p.
Matrix bhs_limit_matrix(const Vector& p);
/// v*ⁱ ∝ (pⁱ/qⁱ)·Σ_{k≠i} p^k.
Vector bhs_v_star(const Vector& p);

/// Φ(s, ν): Φⁱⁱ = pⁱ and Φⁱʲ = (sⁱ/νⁱ)·q^j / Σ_{k≠j}(s^k/ν^k) for i ≠ j.
Matrix phi(const Vector& s, const Vector& nu, const Vector& p);

/// Jacobian of (ν, s) ↦ vec(Φ(s, ν)) (column-major vec, d²×2d). The first d
/// columns differentiate in ν, the last d in s.
Matrix phi_vec_jacobian(const Vector& s, const Vector& nu, const Vector& p);

enum class AssumptionStatus { holds, fails, not_checkable };
std::string to_string(AssumptionStatus status);

struct AssumptionEntry {
  std::string id;  // "A1(i)", "A1(ii)", "A1(iii)", "A2", "A3", "A4", "A5", "A'1", "A'3"
  AssumptionStatus status = AssumptionStatus::not_checkable;
  std::string detail;
  double margin = 0.0;
};

struct AssumptionReport {
  std::vector<AssumptionEntry> entries;

  AssumptionStatus status(const std::string& id) const;
  const AssumptionEntry& entry(const std::string& id) const;
  bool holds(const std::string& id) const { return status(id) == AssumptionStatus::holds; }
};

AssumptionReport check_assumptions(const ModelSpec& model);

}  // namespace urnsa
