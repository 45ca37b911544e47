#include "urnsa/models.hpp"

#include "urnsa/errors.hpp"
#include "urnsa/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace urnsa {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::wei: return "wei";
    case ModelKind::bhs: return "bhs";
    case ModelKind::homogeneous: return "homogeneous";
    case ModelKind::removal: return "removal";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "wei") return ModelKind::wei;
  if (name == "bhs") return ModelKind::bhs;
  if (name == "homogeneous") return ModelKind::homogeneous;
  if (name == "removal") return ModelKind::removal;
  throw InputError("unknown model kind '" + name + "'");
}

std::string to_string(AssumptionStatus status) {
  switch (status) {
    case AssumptionStatus::holds: return "holds";
    case AssumptionStatus::fails: return "fails";
    case AssumptionStatus::not_checkable: return "not-checkable";
  }
  return "unknown";
}

InitialComposition default_initial(Eigen::Index d) {
  return {Vector::Constant(d, 1.0 / static_cast<double>(d)), Vector::Ones(d), Vector::Ones(d)};
}

namespace {

// Σ_{k≠j} x^k, summed explicitly so that the d = 2 case is exact.
double sum_except(const Vector& x, Eigen::Index j) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (k != j) total += x(k);
  }
  return total;
}

void check_probabilities(const Vector& p) {
  if (p.size() < 2) throw InputError("model needs at least two arms");
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p(i) > 0.0 && p(i) < 1.0)) {
      throw InputError("success probabilities must lie strictly between 0 and 1");
    }
  }
}

InitialComposition resolve_initial(Eigen::Index d, std::optional<InitialComposition> init) {
  InitialComposition out = default_initial(d);
  if (init) {
    if (init->y0.size() > 0) out.y0 = init->y0;
    if (init->n0.size() > 0) out.n0 = init->n0;
    if (init->s0.size() > 0) out.s0 = init->s0;
  }
  if (out.y0.size() != d || out.n0.size() != d || out.s0.size() != d) {
    throw InputError("initial composition has the wrong dimension");
  }
  if ((out.y0.array() < 0.0).any() || !(out.y0.sum() > 0.0)) {
    throw InputError("Y0 must be nonnegative and nonzero");
  }
  if ((out.n0.array() <= 0.0).any()) throw InputError("N0 must be positive");
  if ((out.s0.array() < 0.0).any()) throw InputError("S0 must be nonnegative");
  return out;
}

// Failure column of the BHS rule for arm j given success counts S and draw counts N.
void bhs_failure_column(const Vector& S, const Vector& N, Eigen::Index j,
                        Eigen::Ref<Vector> out) {
  out = S.cwiseQuotient(N);
  double denom = 0.0;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    if (k != j) denom += out(k);
  }
  if (!(denom > 0.0)) throw SingularityError("bhs: all other success proportions vanish");
  out /= denom;
  out(j) = 0.0;
}

Matrix second_moment_of(const ColumnDistribution& law) {
  const Eigen::Index d = law.front().column.size();
  Matrix C = Matrix::Zero(d, d);
  for (const auto& o : law) C += o.probability * o.column * o.column.transpose();
  return C;
}

}  // namespace

UrnState ModelSpec::initial_state() const {
  UrnState s;
  s.n = 0;
  s.Y = init_.y0;
  s.N = init_.n0;
  s.S = init_.s0;
  s.w = init_.y0.sum();
  return s;
}

Matrix ModelSpec::generating_matrix(const UrnState& state) const {
  if (kind_ == ModelKind::bhs) return phi(state.S, state.N, p_);
  return limit_H_;
}

int ModelSpec::outcome_count(Eigen::Index arm) const {
  if (bernoulli_responses()) return 2;
  return static_cast<int>(columns_.at(static_cast<std::size_t>(arm)).size());
}

double ModelSpec::outcome_probability(Eigen::Index arm, int outcome) const {
  if (bernoulli_responses()) return outcome == 1 ? p_(arm) : 1.0 - p_(arm);
  return columns_.at(static_cast<std::size_t>(arm)).at(static_cast<std::size_t>(outcome)).probability;
}

int ModelSpec::sample_outcome(Eigen::Index arm, double v) const {
  if (bernoulli_responses()) return v < p_(arm) ? 1 : 0;
  const auto& law = columns_[static_cast<std::size_t>(arm)];
  double cumulative = 0.0;
  for (std::size_t k = 0; k + 1 < law.size(); ++k) {
    cumulative += law[k].probability;
    if (v < cumulative) return static_cast<int>(k);
  }
  return static_cast<int>(law.size()) - 1;
}

void ModelSpec::addition_column(Eigen::Index arm, int outcome, const UrnState& state,
                                Eigen::Ref<Vector> out) const {
  switch (kind_) {
    case ModelKind::wei:
      if (outcome == 1) {
        out.setZero();
        out(arm) = 1.0;
      } else {
        out.setConstant(1.0 / static_cast<double>(d_ - 1));
        out(arm) = 0.0;
      }
      return;
    case ModelKind::bhs:
      if (outcome == 1) {
        out.setZero();
        out(arm) = 1.0;
      } else {
        bhs_failure_column(state.S, state.N, arm, out);
      }
      return;
    case ModelKind::homogeneous:
    case ModelKind::removal:
      out = columns_[static_cast<std::size_t>(arm)][static_cast<std::size_t>(outcome)].column;
      return;
  }
}

Vector ModelSpec::addition_column(Eigen::Index arm, int outcome, const UrnState& state) const {
  Vector out(d_);
  addition_column(arm, outcome, state, out);
  return out;
}

Matrix ModelSpec::column_second_moment(Eigen::Index arm, const UrnState& state) const {
  if (kind_ == ModelKind::bhs) {
    Vector f(d_);
    bhs_failure_column(state.S, state.N, arm, f);
    Matrix C = (1.0 - p_(arm)) * f * f.transpose();
    C(arm, arm) += p_(arm);
    return C;
  }
  return limit_C_[static_cast<std::size_t>(arm)];
}

Matrix wei_matrix(const Vector& p) {
  check_probabilities(p);
  const Eigen::Index d = p.size();
  Matrix H(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      H(i, j) = i == j ? p(j) : (1.0 - p(j)) / static_cast<double>(d - 1);
    }
  }
  return H;
}

Vector wei_v_star(const Vector& p) {
  check_probabilities(p);
  Vector v = (1.0 - p.array()).inverse().matrix();
  return v / v.sum();
}

Matrix bhs_limit_matrix(const Vector& p) {
  check_probabilities(p);
  return phi(p, Vector::Ones(p.size()), p);
}

Vector bhs_v_star(const Vector& p) {
  check_probabilities(p);
  Vector v(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) v(i) = p(i) / (1.0 - p(i)) * sum_except(p, i);
  return v / v.sum();
}

Matrix phi(const Vector& s, const Vector& nu, const Vector& p) {
  const Eigen::Index d = p.size();
  if (d < 2 || s.size() != d || nu.size() != d) throw InputError("phi: dimension mismatch");
  if ((nu.array() <= 0.0).any()) throw InputError("phi: nu must be positive");
  const Vector rho = s.cwiseQuotient(nu);
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double denom = sum_except(rho, j);
    if (!(denom > 0.0)) throw SingularityError("phi: zero denominator Σ_{k≠j} s^k/ν^k");
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, j) = i == j ? p(i) : rho(i) / denom * (1.0 - p(j));
    }
  }
  return out;
}

Matrix phi_vec_jacobian(const Vector& s, const Vector& nu, const Vector& p) {
  const Eigen::Index d = p.size();
  if (d < 2 || s.size() != d || nu.size() != d) {
    throw InputError("phi_vec_jacobian: dimension mismatch");
  }
  const Vector rho = s.cwiseQuotient(nu);
  Matrix J = Matrix::Zero(d * d, 2 * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double R = sum_except(rho, j);
    if (!(R > 0.0)) throw SingularityError("phi_vec_jacobian: zero denominator");
    const double qj = 1.0 - p(j);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j) continue;
      const Eigen::Index row = i + j * d;
      for (Eigen::Index m = 0; m < d; ++m) {
        double d_rho = (m == i ? qj / R : 0.0);
        if (m != j) d_rho -= qj * rho(i) / (R * R);
        J(row, m) = -d_rho * s(m) / (nu(m) * nu(m));  // ∂/∂ν^m
        J(row, d + m) = d_rho / nu(m);                 // ∂/∂s^m
      }
    }
  }
  return J;
}

ModelSpec wei_model(const Vector& p, std::optional<InitialComposition> init) {
  check_probabilities(p);
  ModelSpec m;
  m.kind_ = ModelKind::wei;
  m.d_ = p.size();
  m.p_ = p;
  m.init_ = resolve_initial(m.d_, std::move(init));
  m.limit_H_ = wei_matrix(p);
  const double other = 1.0 / static_cast<double>(m.d_ - 1);
  for (Eigen::Index j = 0; j < m.d_; ++j) {
    Vector f = Vector::Constant(m.d_, other);
    f(j) = 0.0;
    Matrix C = (1.0 - p(j)) * f * f.transpose();
    C(j, j) += p(j);
    m.limit_C_.push_back(C);
  }
  m.closed_v_ = wei_v_star(p);
  return m;
}

ModelSpec bhs_model(const Vector& p, std::optional<InitialComposition> init) {
  check_probabilities(p);
  ModelSpec m;
  m.kind_ = ModelKind::bhs;
  m.d_ = p.size();
  m.p_ = p;
  m.init_ = resolve_initial(m.d_, std::move(init));
  const Vector pi0 = m.init_.s0.cwiseQuotient(m.init_.n0);
  if (!(pi0.sum() > 0.0)) throw SingularityError("bhs: all initial success proportions vanish");
  m.limit_H_ = bhs_limit_matrix(p);
  for (Eigen::Index k = 0; k < m.d_; ++k) {
    const double denom = sum_except(p, k);
    Matrix C = Matrix::Zero(m.d_, m.d_);
    for (Eigen::Index i = 0; i < m.d_; ++i) {
      for (Eigen::Index j = 0; j < m.d_; ++j) {
        if (i != k && j != k) C(i, j) = p(i) * p(j) * (1.0 - p(k)) / (denom * denom);
      }
    }
    C(k, k) = p(k);
    m.limit_C_.push_back(C);
  }
  m.closed_v_ = bhs_v_star(p);
  return m;
}

ModelSpec make_column_model(ModelKind kind, const std::vector<ColumnDistribution>& columns,
                            double balance, const Vector& lattice,
                            std::optional<InitialComposition> init) {
  const auto d = static_cast<Eigen::Index>(columns.size());
  if (d < 2) throw InputError("column model needs at least two arms");
  if (!(balance > 0.0)) throw InputError("balance constant must be positive");
  ModelSpec m;
  m.kind_ = kind;
  m.d_ = d;
  m.input_balance_ = balance;
  m.limit_H_ = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto& law = columns[static_cast<std::size_t>(j)];
    if (law.empty()) throw InputError("column law must have at least one support point");
    double mass = 0.0;
    ColumnDistribution normalized;
    for (const auto& o : law) {
      if (o.column.size() != d) throw InputError("column support vector has the wrong dimension");
      if (!(o.probability > 0.0)) throw InputError("support probabilities must be positive");
      if (!o.column.allFinite()) throw InputError("support vector has non-finite entries");
      if (kind == ModelKind::homogeneous && (o.column.array() < 0.0).any()) {
        throw InputError("homogeneous design requires nonnegative additions");
      }
      mass += o.probability;
      normalized.push_back({o.probability, o.column / balance});
    }
    if (std::abs(mass - 1.0) > 1e-12) throw InputError("support probabilities must sum to 1");
    Vector mean = Vector::Zero(d);
    for (const auto& o : normalized) mean += o.probability * o.column;
    const double colsum = mean.sum();
    if (std::abs(colsum - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "balance violation: column " << j + 1 << " mean sums to " << colsum * balance
          << ", expected " << balance;
      throw BalanceError(msg.str());
    }
    m.limit_H_.col(j) = mean;
    m.limit_C_.push_back(second_moment_of(normalized));
    m.columns_.push_back(std::move(normalized));
  }
  InitialComposition resolved = resolve_initial(d, std::move(init));
  resolved.y0 /= balance;
  m.init_ = resolved;
  if (kind == ModelKind::removal) {
    if (lattice.size() != d || (lattice.array() <= 0.0).any()) {
      throw InputError("removal design needs one positive lattice constant per arm");
    }
    m.lattice_ = lattice;
  }
  return m;
}

ModelSpec homogeneous_model(const std::vector<ColumnDistribution>& columns, double balance,
                            std::optional<InitialComposition> init) {
  return make_column_model(ModelKind::homogeneous, columns, balance, Vector(), std::move(init));
}

ModelSpec removal_model(const std::vector<ColumnDistribution>& columns, double balance,
                        const Vector& lattice, std::optional<InitialComposition> init) {
  return make_column_model(ModelKind::removal, columns, balance, lattice, std::move(init));
}

AssumptionStatus AssumptionReport::status(const std::string& id) const {
  return entry(id).status;
}

const AssumptionEntry& AssumptionReport::entry(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return e;
  }
  throw InputError("unknown assumption id '" + id + "'");
}

namespace {

constexpr double kLatticeTol = 1e-9;

bool near_integer(double x) { return std::abs(x - std::round(x)) <= kLatticeTol; }

AssumptionEntry make_entry(std::string id, bool ok, std::string detail, double margin = 0.0) {
  return {std::move(id), ok ? AssumptionStatus::holds : AssumptionStatus::fails, std::move(detail),
          margin};
}

// Largest column-sum deviation from 1 of H_{n+1} at the initial state and of H.
double balance_defect(const ModelSpec& model) {
  const Matrix H0 = model.generating_matrix(model.initial_state());
  const double a = (H0.colwise().sum().array() - 1.0).abs().maxCoeff();
  const double b = (model.limit_H().colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(a, b);
}

AssumptionEntry check_a_prime_3(const Matrix& H) {
  const auto eig = spectral::spectrum(H);
  double radius = 0.0;
  double dist_to_one = 1e300;
  for (const auto& ev : eig) {
    radius = std::max(radius, std::abs(ev));
    dist_to_one = std::min(dist_to_one, std::abs(ev - 1.0));
  }
  if (dist_to_one > 1e-9 || radius > 1.0 + 1e-9) {
    return make_entry("A'3", false, "1 is not the eigenvalue of largest modulus", radius - 1.0);
  }
  // Eigenvector of 1 normalized to unit weight: replace one row of (H − I)v = 0 by 𝟙ᵀv = 1.
  const Eigen::Index d = H.rows();
  Matrix K = H - Matrix::Identity(d, d);
  K.row(d - 1).setOnes();
  Vector rhs = Vector::Zero(d);
  rhs(d - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible()) {
    return make_entry("A'3", false, "eigenvalue 1 is not simple or its eigenvector has zero weight");
  }
  const Vector v = lu.solve(rhs);
  const double min_entry = v.minCoeff();
  return make_entry("A'3", min_entry >= -1e-12,
                    "eigenvalue 1 is maximal; min entry of its weight-1 eigenvector", min_entry);
}

AssumptionEntry check_a_prime_1(const ModelSpec& model) {
  if (model.kind() != ModelKind::removal) {
    return {"A'1", AssumptionStatus::not_checkable, "no lattice constants for this design", 0.0};
  }
  const Vector& c = model.lattice();
  const Eigen::Index d = model.dim();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (const auto& o : model.columns()[static_cast<std::size_t>(j)]) {
      if (o.column.sum() < -1e-12) {
        return make_entry("A'1", false, "a support column has negative sum", o.column.sum());
      }
      for (Eigen::Index i = 0; i < d; ++i) {
        const double scaled = (i == j ? 1.0 : 0.0) + c(i) * o.column(i);
        if (scaled < -kLatticeTol || !near_integer(scaled)) {
          std::ostringstream msg;
          msg << "entry (" << i + 1 << "," << j + 1 << ") violates δ_ij/c_i + D^ij ∈ ℕ/c_i";
          return make_entry("A'1", false, msg.str(), scaled);
        }
      }
    }
  }
  const Vector& y0 = model.initial().y0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double scaled = c(i) * y0(i);
    if (scaled < -kLatticeTol || !near_integer(scaled)) {
      return make_entry("A'1", false, "Y0 is not on the lattice ℕ/c_i", scaled);
    }
  }
  const double defect = balance_defect(model);
  return make_entry("A'1", defect <= 1e-12, "lattice condition, nonnegative column sums, balance",
                    defect);
}

}  // namespace

AssumptionReport check_assumptions(const ModelSpec& model) {
  AssumptionReport report;
  auto& e = report.entries;
  const Eigen::Index d = model.dim();
  const Matrix& H = model.limit_H();

  // A1(i): nonnegative additions on every support point.
  bool nonneg = true;
  double min_entry = 0.0;
  if (!model.bernoulli_responses()) {
    for (const auto& law : model.columns()) {
      for (const auto& o : law) min_entry = std::min(min_entry, o.column.minCoeff());
    }
    nonneg = min_entry >= 0.0;
  }
  e.push_back(make_entry("A1(i)", nonneg, "addition rule entries are nonnegative", min_entry));

  const double defect = balance_defect(model);
  e.push_back(make_entry("A1(ii)", defect <= 1e-12, "generating-matrix column sums equal 1",
                         defect));

  const Vector& y0 = model.initial().y0;
  e.push_back(make_entry("A1(iii)", (y0.array() >= 0.0).all() && y0.sum() > 0.0,
                         "Y0 is nonnegative and nonzero", y0.sum()));

  // Finite support (or entries bounded by 1 for the Bernoulli designs) bounds every moment.
  double max_norm = 0.0;
  if (model.bernoulli_responses()) {
    max_norm = 1.0;
  } else {
    for (const auto& law : model.columns()) {
      for (const auto& o : law) max_norm = std::max(max_norm, o.column.norm());
    }
  }
  e.push_back(make_entry("A2", true, "bounded addition columns; sup ‖D^{·j}‖", max_norm));

  const bool irreducible = (H.array() >= 0.0).all() && spectral::is_irreducible(H);
  e.push_back(make_entry("A3", irreducible,
                         irreducible ? "limit generating matrix is irreducible"
                                     : "limit generating matrix is reducible"));

  double worst_psd = 1e300;
  int min_rank = static_cast<int>(d);
  for (const auto& C : model.limit_second_moments()) {
    worst_psd = std::min(worst_psd, spectral::min_symmetric_eigenvalue(C));
    Eigen::SelfAdjointEigenSolver<Matrix> es(C, Eigen::EigenvaluesOnly);
    const double tol = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    min_rank = std::min(min_rank, static_cast<int>((es.eigenvalues().array() > tol).count()));
  }
  {
    std::ostringstream msg;
    msg << "bounded columns give all moments; limits C^j exist and are PSD (min rank "
        << min_rank << " of " << d << ")";
    e.push_back(make_entry("A4", worst_psd >= -1e-12, msg.str(), worst_psd));
  }

  if (model.kind() == ModelKind::bhs) {
    const Vector v = *model.closed_form_v_star();
    const Vector u = model.p().cwiseProduct(v);
    const double slope = phi_vec_jacobian(u, v, model.p()).norm();
    if (slope > 1e-12) {
      e.push_back(make_entry("A5", false,
                             "H_n = Φ(S̃_n, Ñ_n) has a non-degenerate √n fluctuation "
                             "(‖DΦ‖ at the equilibrium), so n·E|||H_n − H|||² does not vanish",
                             slope));
    } else {
      e.push_back(make_entry("A5", true, "Φ is constant at d = 2, so H_n = H", slope));
    }
  } else {
    e.push_back(make_entry("A5", true, "generating matrix is constant (H_n = H)", 0.0));
  }

  e.push_back(check_a_prime_1(model));
  e.push_back(check_a_prime_3(H));
  return report;
}

}  // namespace urnsa
