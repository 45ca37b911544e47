#include "urnsa/asymptotics.hpp"

#include "urnsa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace urnsa {

namespace {

constexpr double kUnitEigenTol = 1e-8;
constexpr double kKnifeEdgeTol = 1e-10;

void require_square(const Matrix& H, const Vector& v, const char* who) {
  if (H.rows() != H.cols() || H.rows() != v.size()) {
    throw InputError(std::string(who) + ": dimension mismatch");
  }
}

Matrix multinomial_cov(const Vector& pi) {
  Matrix m = -pi * pi.transpose();
  m.diagonal() += pi;
  return m;
}

double sum_except(const Vector& x, Eigen::Index j) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (k != j) total += x(k);
  }
  return total;
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::a: return "a";
    case Regime::b: return "b";
    case Regime::c: return "c";
  }
  return "unknown";
}

RegimeInfo classify_regime(const Matrix& H) {
  RegimeInfo info;
  info.spectrum = spectral::spectrum(H);
  std::size_t unit = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < info.spectrum.size(); ++k) {
    const double dist = std::abs(info.spectrum[k] - 1.0);
    if (dist < best) {
      best = dist;
      unit = k;
    }
  }
  if (best > kUnitEigenTol) throw BalanceError("classify_regime: 1 is not an eigenvalue of H");
  bool found = false;
  for (std::size_t k = 0; k < info.spectrum.size(); ++k) {
    if (k == unit) continue;
    if (!found || info.spectrum[k].real() > info.lambda_max.real()) {
      info.lambda_max = info.spectrum[k];
      found = true;
    }
  }
  const double re = info.lambda_max.real();
  info.Lambda = 1.0 - re;
  if (std::abs(re - 0.5) <= kKnifeEdgeTol) {
    info.regime = Regime::b;
  } else if (re < 0.5) {
    info.regime = Regime::a;
  } else {
    info.regime = Regime::c;
    info.beta = 1.0 - re;
  }
  return info;
}

Matrix dh_star(const Matrix& H, const Vector& v_star) {
  require_square(H, v_star, "dh_star");
  const Eigen::Index d = H.rows();
  const Matrix I = Matrix::Identity(d, d);
  const Matrix v1 = v_star * Vector::Ones(d).transpose();
  Matrix Dh = Matrix::Zero(2 * d, 2 * d);
  Dh.topLeftCorner(d, d) = I - H + v1;
  Dh.bottomLeftCorner(d, d) = v1 - I;
  Dh.bottomRightCorner(d, d) = I;
  return Dh;
}

Vector mean_field(const Matrix& H, const Vector& theta) {
  const Eigen::Index d = H.rows();
  if (theta.size() != 2 * d) throw InputError("mean_field: theta must have length 2d");
  const Vector y = theta.head(d);
  const Vector nu = theta.tail(d);
  const double f = 2.0 - y.sum();
  Vector h(2 * d);
  h.head(d) = y - f * (H * y);
  h.tail(d) = nu - f * y;
  return h;
}

Vector mean_field_extended(const Vector& p, const Vector& theta) {
  const Eigen::Index d = p.size();
  if (theta.size() != 3 * d) throw InputError("mean_field_extended: theta must have length 3d");
  const Vector y = theta.head(d);
  const Vector nu = theta.segment(d, d);
  const Vector s = theta.tail(d);
  const double f = 2.0 - y.sum();
  Vector h(3 * d);
  h.head(d) = y - f * (phi(s, nu, p) * y);
  h.segment(d, d) = nu - f * y;
  h.tail(d) = s - f * p.cwiseProduct(y);
  return h;
}

Matrix gamma_blocks(const Matrix& H, const Vector& v_star, const std::vector<Matrix>& C) {
  require_square(H, v_star, "gamma_blocks");
  const Eigen::Index d = H.rows();
  if (static_cast<Eigen::Index>(C.size()) != d) throw InputError("gamma_blocks: need d matrices C^k");
  Matrix G1 = -v_star * v_star.transpose();
  for (Eigen::Index k = 0; k < d; ++k) {
    const Matrix& Ck = C[static_cast<std::size_t>(k)];
    if (Ck.rows() != d || Ck.cols() != d) throw InputError("gamma_blocks: C^k has the wrong size");
    if (!spectral::is_symmetric(Ck, 1e-12 * std::max(1.0, Ck.norm()))) {
      throw InputError("gamma_blocks: C^k is not symmetric");
    }
    G1 += v_star(k) * Ck;
  }
  const Matrix G2 = multinomial_cov(v_star);
  const Matrix G12 = H * G2;
  Matrix G(2 * d, 2 * d);
  G << G1, G12, G12.transpose(), G2;
  return G;
}

std::vector<Matrix> c_matrices_bhs(const Vector& p) {
  const Eigen::Index d = p.size();
  std::vector<Matrix> out;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double denom = sum_except(p, k);
    Matrix C = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        if (i != k && j != k) C(i, j) = p(i) * p(j) * (1.0 - p(k)) / (denom * denom);
      }
    }
    C(k, k) = p(k);
    out.push_back(C);
  }
  return out;
}

PhiJacobians dphi_y(const Vector& s, const Vector& nu, const Vector& y, const Vector& p) {
  const Eigen::Index d = p.size();
  if (s.size() != d || nu.size() != d || y.size() != d || d < 2) {
    throw InputError("dphi_y: dimension mismatch");
  }
  if ((nu.array() <= 0.0).any()) throw InputError("dphi_y: nu must be positive");
  const Vector rho = s.cwiseQuotient(nu);
  Vector R(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    R(j) = sum_except(rho, j);
    if (!(R(j) > 0.0)) throw SingularityError("dphi_y: zero denominator");
  }
  // (Φy)_i = p_i y_i + ρ_i Σ_{j≠i} q_j y_j / R_j.
  Matrix J_rho = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double direct = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j != i) direct += (1.0 - p(j)) * y(j) / R(j);
    }
    J_rho(i, i) += direct;
    for (Eigen::Index m = 0; m < d; ++m) {
      double through_R = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (j != i && j != m) through_R += (1.0 - p(j)) * y(j) / (R(j) * R(j));
      }
      J_rho(i, m) -= rho(i) * through_R;
    }
  }
  PhiJacobians out;
  out.J_s = J_rho * nu.cwiseInverse().asDiagonal();
  out.J_nu = -(J_rho * s.cwiseQuotient(nu.cwiseProduct(nu)).asDiagonal());
  return out;
}

Matrix dh_tilde_star(const Matrix& H, const Vector& v_star, const Vector& p) {
  require_square(H, v_star, "dh_tilde_star");
  const Eigen::Index d = H.rows();
  if (p.size() != d) throw InputError("dh_tilde_star: dimension mismatch");
  const Matrix I = Matrix::Identity(d, d);
  const Matrix v1 = v_star * Vector::Ones(d).transpose();
  const PhiJacobians J = dphi_y(p.cwiseProduct(v_star), v_star, v_star, p);
  Matrix Dh = Matrix::Zero(3 * d, 3 * d);
  Dh.block(0, 0, d, d) = I - H + v1;
  Dh.block(0, d, d, d) = -J.J_nu;
  Dh.block(0, 2 * d, d, d) = -J.J_s;
  Dh.block(d, 0, d, d) = v1 - I;
  Dh.block(d, d, d, d) = I;
  Dh.block(2 * d, 0, d, d) = p.asDiagonal() * (v1 - I);
  Dh.block(2 * d, 2 * d, d, d) = I;
  return Dh;
}

Matrix gamma_tilde(const Matrix& H, const Vector& v_star, const Vector& p) {
  require_square(H, v_star, "gamma_tilde");
  const Eigen::Index d = H.rows();
  if (p.size() != d) throw InputError("gamma_tilde: dimension mismatch");
  const Matrix G = gamma_blocks(H, v_star, c_matrices_bhs(p));
  const Matrix V = multinomial_cov(v_star);
  const Matrix P = p.asDiagonal();
  Matrix out(3 * d, 3 * d);
  out.topLeftCorner(2 * d, 2 * d) = G;
  const Matrix G13 = V * P;
  out.block(0, 2 * d, d, d) = G13;
  out.block(d, 2 * d, d, d) = G13;
  out.block(2 * d, 0, d, d) = G13.transpose();
  out.block(2 * d, d, d, d) = G13.transpose();
  Matrix G33 = -P * v_star * v_star.transpose() * P;
  G33.diagonal() += p.cwiseProduct(v_star);
  out.block(2 * d, 2 * d, d, d) = G33;
  return out;
}

Matrix sigma_star(const Matrix& Dh, const Matrix& Gamma) {
  const Eigen::Index n = Dh.rows();
  const Matrix M = Dh - 0.5 * Matrix::Identity(n, n);
  return spectral::lyapunov_solve(M, Gamma);
}

Matrix gamma_H(const Vector& p, const Vector& v_star, const Matrix& Sigma_tilde) {
  const Eigen::Index d = p.size();
  if (v_star.size() != d || Sigma_tilde.rows() != 3 * d || Sigma_tilde.cols() != 3 * d) {
    throw InputError("gamma_H: dimension mismatch");
  }
  const Matrix J = phi_vec_jacobian(p.cwiseProduct(v_star), v_star, p);
  const Matrix block = Sigma_tilde.block(d, d, 2 * d, 2 * d);
  Matrix out = J * block * J.transpose();
  return 0.5 * (out + out.transpose());
}

Matrix gamma_at_state(const ModelSpec& model, const UrnState& state, bool extended) {
  const Eigen::Index d = model.dim();
  if (extended && !model.bernoulli_responses()) {
    throw InputError("gamma_at_state: success increments need Bernoulli responses");
  }
  const Vector pi = state.Y / state.w;
  const Matrix Hn = model.generating_matrix(state);
  const Vector m = Hn * pi;
  Matrix G1 = -m * m.transpose();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (pi(j) > 0.0) G1 += pi(j) * model.column_second_moment(j, state);
  }
  const Matrix V = multinomial_cov(pi);
  const Eigen::Index size = extended ? 3 * d : 2 * d;
  Matrix out(size, size);
  out.topLeftCorner(d, d) = G1;
  out.block(0, d, d, d) = Hn * V;
  out.block(d, 0, d, d) = (Hn * V).transpose();
  out.block(d, d, d, d) = V;
  if (extended) {
    const Vector& p = model.p();
    const Matrix P = p.asDiagonal();
    const Matrix PiP = pi.cwiseProduct(p).asDiagonal();
    const Matrix G13 = PiP - m * pi.transpose() * P;
    const Matrix G23 = PiP - pi * pi.transpose() * P;
    const Matrix G33 = PiP - P * pi * pi.transpose() * P;
    out.block(0, 2 * d, d, d) = G13;
    out.block(2 * d, 0, d, d) = G13.transpose();
    out.block(d, 2 * d, d, d) = G23;
    out.block(2 * d, d, d, d) = G23.transpose();
    out.block(2 * d, 2 * d, d, d) = G33;
  }
  return out;
}

AsymptoticsBundle compute_asymptotics(const ModelSpec& model) {
  if (model.kind() == ModelKind::removal) {
    throw InputError("asymptotics are available for wei, bhs and homogeneous designs");
  }
  AsymptoticsBundle b;
  b.kind = model.kind();
  b.assumptions = check_assumptions(model);
  if (!b.assumptions.holds("A3")) throw InputError("A3 fails: reducible");
  b.H = model.limit_H();
  b.C = model.limit_second_moments();
  b.v_star = model.closed_form_v_star() ? *model.closed_form_v_star()
                                        : spectral::perron_vector(b.H).v;
  b.regime = classify_regime(b.H);
  const Eigen::Index d = model.dim();
  b.extended = model.kind() == ModelKind::bhs;
  if (b.extended) {
    const Vector& p = model.p();
    b.theta_star.resize(3 * d);
    b.theta_star << b.v_star, b.v_star, p.cwiseProduct(b.v_star);
    b.Gamma = gamma_tilde(b.H, b.v_star, p);
    b.Dh = dh_tilde_star(b.H, b.v_star, p);
  } else {
    b.theta_star.resize(2 * d);
    b.theta_star << b.v_star, b.v_star;
    b.Gamma = gamma_blocks(b.H, b.v_star, b.C);
    b.Dh = dh_star(b.H, b.v_star);
  }
  if (b.regime.regime == Regime::a) {
    b.Sigma = sigma_star(b.Dh, b.Gamma);
    const Matrix M = b.Dh - 0.5 * Matrix::Identity(b.Dh.rows(), b.Dh.cols());
    const double T = spectral::suggested_quadrature_horizon(M);
    const auto q =
        spectral::sigma_by_quadrature(M, b.Gamma, T, spectral::suggested_quadrature_steps(M, T));
    b.quadrature_rel_error = relative_frobenius(q.standard, *b.Sigma);
    if (b.extended) b.Gamma_H = gamma_H(model.p(), b.v_star, *b.Sigma);
  } else {
    b.sigma_omitted_reason = b.regime.regime == Regime::b ? "regime_b" : "regime_c";
  }
  return b;
}

std::vector<Eigen::Index> gamma_h_support(Eigen::Index d) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i != j) idx.push_back(i + j * d);
    }
  }
  return idx;
}

}  // namespace urnsa
