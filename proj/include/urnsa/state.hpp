#pragma once

#include "urnsa/linalg.hpp"

#include <cstdint>

namespace urnsa {

/// Full adaptive-design state after n draws.
///
/// Y holds (possibly fractional) ball masses, N the allocation counts and S
/// the success counts, all including their initial values. `w` caches the
/// weight of Y.
struct UrnState {
  std::int64_t n = 0;
  Vector Y;
  Vector N;
  Vector S;
  double w = 0.0;

  Eigen::Index dim() const { return Y.size(); }

  /// Success proportions Π = S/N.
  Vector pi() const { return S.cwiseQuotient(N); }

  /// Normalized composition Y/n (Y itself when n = 0).
  Vector y_tilde() const { return Y / scale(); }
  Vector n_tilde() const { return N / scale(); }
  Vector s_tilde() const { return S / scale(); }

 private:
  double scale() const { return n > 0 ? static_cast<double>(n) : 1.0; }
};

}  // namespace urnsa
