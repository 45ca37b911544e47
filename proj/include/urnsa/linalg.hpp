#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace urnsa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Weight w(u): the sum of the entries.
inline double weight(const Vector& u) { return u.sum(); }

inline Vector ones(Eigen::Index d) { return Vector::Ones(d); }

/// Relative Frobenius distance ‖a − b‖_F / ‖b‖_F (absolute when b = 0).
inline double relative_frobenius(const Matrix& a, const Matrix& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  return denom > 0.0 ? diff / denom : diff;
}

inline std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// A(idx, idx).
inline Matrix principal_submatrix(const Matrix& A, const std::vector<Eigen::Index>& idx) {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Matrix out(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) out(a, b) = A(idx[a], idx[b]);
  }
  return out;
}

}  // namespace urnsa
