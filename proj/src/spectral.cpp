#include "urnsa/spectral.hpp"

#include "urnsa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace urnsa::spectral {

namespace {

void require_square(const Matrix& A, const char* who) {
  if (A.rows() != A.cols() || A.rows() < 1) {
    throw InputError(std::string(who) + ": matrix must be square and non-empty");
  }
  if (!A.allFinite()) {
    throw InputError(std::string(who) + ": matrix has non-finite entries");
  }
}

double sign_of(double magnitude, double s) { return s >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude); }

// Householder reduction to upper Hessenberg form (in place, similarity only).
void reduce_to_hessenberg(Matrix& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    Vector x = a.block(k + 1, k, n - k - 1, 1);
    const double alpha = -sign_of(x.norm(), x(0));
    if (alpha == 0.0) continue;
    Vector v = x;
    v(0) -= alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // A ← P A P with P = I − 2vvᵀ acting on rows/cols k+1..n−1.
    auto rows = a.bottomRows(n - k - 1);
    rows -= 2.0 * v * (v.transpose() * rows);
    auto cols = a.rightCols(n - k - 1);
    cols -= 2.0 * (cols * v) * v.transpose();
  }
}

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
ComplexSpectrum hessenberg_qr(Matrix& a) {
  const int n = static_cast<int>(a.rows());
  ComplexSpectrum eig(static_cast<std::size_t>(n));
  const double eps = std::numeric_limits<double>::epsilon();
  double anorm = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  }
  int nn = n - 1;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        eig[static_cast<std::size_t>(nn)] = Complex(x + t, 0.0);
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            const double first = x + z;
            double second = first;
            if (z != 0.0) second = x - w / z;
            eig[static_cast<std::size_t>(nn - 1)] = Complex(first, 0.0);
            eig[static_cast<std::size_t>(nn)] = Complex(second, 0.0);
          } else {
            eig[static_cast<std::size_t>(nn - 1)] = Complex(x + p, z);
            eig[static_cast<std::size_t>(nn)] = Complex(x + p, -z);
          }
          nn -= 2;
        } else {
          if (its == 60) throw NumericalError("spectrum: QR iteration did not converge");
          if (its % 10 == 0 && its > 0) {
            // exceptional shift
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                            std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return eig;
}

double operator_norm(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

}  // namespace

PerronResult perron_vector(const Matrix& H, double tol, int max_iter) {
  require_square(H, "perron_vector");
  const Eigen::Index d = H.rows();
  if (d < 2) throw InputError("perron_vector: dimension must be at least 2");
  if ((H.array() < 0.0).any()) throw InputError("perron_vector: matrix has negative entries");
  const Eigen::RowVectorXd sums = H.colwise().sum();
  const double c = sums(0);
  if (!(c > 0.0)) throw InputError("perron_vector: column sums must be positive");
  for (Eigen::Index j = 1; j < d; ++j) {
    if (std::abs(sums(j) - c) > 1e-12 * c) {
      throw InputError("perron_vector: matrix is not balanced (unequal column sums)");
    }
  }
  Vector v = Vector::Constant(d, 1.0 / static_cast<double>(d));
  double residual = (H * v - c * v).norm();
  int it = 0;
  while (residual > tol) {
    if (it >= max_iter) {
      throw IterationLimitError("perron_vector: no convergence within iteration limit", residual);
    }
    v = 0.5 * (v + H * v / c);
    v /= v.sum();
    residual = (H * v - c * v).norm();
    ++it;
  }
  v /= v.sum();
  return {v, c, residual, it};
}

ComplexSpectrum spectrum(const Matrix& A) {
  require_square(A, "spectrum");
  if (A.rows() > kMaxSpectrumDim) {
    throw UnsupportedSizeError("spectrum: dimension " + std::to_string(A.rows()) +
                               " exceeds the supported maximum of 32");
  }
  Matrix a = A;
  reduce_to_hessenberg(a);
  return hessenberg_qr(a);
}

Eigen::VectorXcd eigenvector(const Matrix& A, Complex lambda) {
  require_square(A, "eigenvector");
  const Eigen::Index n = A.rows();
  const double scale = std::max(1.0, A.norm());
  const Complex shift = lambda + Complex(1e-10 * scale, 1e-10 * scale);
  Eigen::MatrixXcd K = A.cast<Complex>();
  K.diagonal().array() -= shift;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(K);
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(n);
  for (int it = 0; it < 3; ++it) {
    x = lu.solve(x);
    x /= x.norm();
  }
  return x;
}

Matrix lyapunov_solve(const Matrix& M, const Matrix& G) {
  require_square(M, "lyapunov_solve");
  require_square(G, "lyapunov_solve");
  if (M.rows() != G.rows()) throw InputError("lyapunov_solve: dimension mismatch");
  for (const Complex& ev : spectrum(M)) {
    if (!(ev.real() > 0.0)) {
      throw StabilityError("lyapunov_solve: M has an eigenvalue with non-positive real part");
    }
  }
  const Eigen::Index d = M.rows();
  const Matrix I = Matrix::Identity(d, d);
  // vec(MΣ + ΣMᵀ) = (I⊗M + M⊗I) vec(Σ), column-major vec.
  Matrix K = Matrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      K.block(i * d, j * d, d, d) += I(i, j) * M;
      K.block(i * d, j * d, d, d) += M(i, j) * I;
    }
  }
  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible()) throw NumericalError("lyapunov_solve: singular Kronecker system");
  const Vector g = Eigen::Map<const Vector>(G.data(), d * d);
  const Vector s = lu.solve(g);
  Matrix sigma = Eigen::Map<const Matrix>(s.data(), d, d);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  const double resid = (M * sigma + sigma * M.transpose() - G).norm();
  if (resid > 1e-9 * std::max(1.0, G.norm())) {
    throw NumericalError("lyapunov_solve: residual " + std::to_string(resid) + " too large");
  }
  return sigma;
}

Matrix matrix_exp(const Matrix& A) {
  require_square(A, "matrix_exp");
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix X = A / std::ldexp(1.0, squarings);
  // [6/6] Padé coefficients c_k = (12−k)! 6! / (12! k! (6−k)!)
  constexpr double c[7] = {1.0,
                           1.0 / 2.0,
                           5.0 / 44.0,
                           1.0 / 66.0,
                           1.0 / 792.0,
                           1.0 / 15840.0,
                           1.0 / 665280.0};
  Matrix power = I;
  Matrix num = c[0] * I;
  Matrix den = c[0] * I;
  for (int k = 1; k <= 6; ++k) {
    power = power * X;
    num += c[k] * power;
    den += ((k % 2 == 0) ? c[k] : -c[k]) * power;
  }
  Matrix E = den.partialPivLu().solve(num);
  for (int k = 0; k < squarings; ++k) E = E * E;
  return E;
}

QuadratureResult sigma_by_quadrature(const Matrix& M, const Matrix& G, double horizon,
                                     int steps) {
  require_square(M, "sigma_by_quadrature");
  require_square(G, "sigma_by_quadrature");
  if (M.rows() != G.rows()) throw InputError("sigma_by_quadrature: dimension mismatch");
  if (!(horizon > 0.0) || steps < 2) {
    throw InputError("sigma_by_quadrature: horizon must be positive and steps ≥ 2");
  }
  if (steps % 2 != 0) ++steps;
  const Eigen::Index d = M.rows();
  const double h = horizon / steps;
  Matrix standard = Matrix::Zero(d, d);
  Matrix transposed = Matrix::Zero(d, d);
  // e^{−M(k+1)h} = e^{−Mkh}·e^{−Mh}; one exponential for the whole grid.
  const Matrix step = matrix_exp(-M * h);
  Matrix E = Matrix::Identity(d, d);
  for (int k = 0; k <= steps; ++k) {
    if (k > 0) E = E * step;
    const double wk = (k == 0 || k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    standard += wk * (E * G * E.transpose());
    transposed += wk * (E.transpose() * G * E);
  }
  standard *= h / 3.0;
  transposed *= h / 3.0;
  QuadratureResult out{standard, transposed, operator_norm(E), false};
  out.tail_ok = out.tail_norm <= 1e-8;
  return out;
}

double suggested_quadrature_horizon(const Matrix& M) {
  double slowest = std::numeric_limits<double>::infinity();
  for (const Complex& ev : spectrum(M)) slowest = std::min(slowest, ev.real());
  if (!(slowest > 0.0)) throw StabilityError("suggested_quadrature_horizon: unstable M");
  return 30.0 / slowest;
}

int suggested_quadrature_steps(const Matrix& M, double horizon) {
  double fastest = 0.0;
  for (const Complex& ev : spectrum(M)) fastest = std::max(fastest, std::abs(ev));
  // About ten nodes per e-folding of the fastest mode keeps Simpson near 1e−8.
  const double want = std::ceil(10.0 * horizon * fastest);
  const int steps = static_cast<int>(std::clamp(want, 4000.0, 2.0e6));
  return steps + steps % 2;
}

bool is_symmetric(const Matrix& A, double tol) {
  if (A.rows() != A.cols()) return false;
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, A.cwiseAbs().maxCoeff());
}

double min_symmetric_eigenvalue(const Matrix& A) {
  const Matrix S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_psd(const Matrix& A, double rel_tol) {
  if (!is_symmetric(A, 1e-10)) return false;
  return min_symmetric_eigenvalue(A) >= -rel_tol * std::max(1.0, A.norm());
}

bool is_irreducible(const Matrix& A) {
  const Eigen::Index n = A.rows();
  if (n != A.cols() || n == 0) return false;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double entry = transpose ? A(j, i) : A(i, j);
        if (entry != 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reaches_all(false) && reaches_all(true);
}

}  // namespace urnsa::spectral
