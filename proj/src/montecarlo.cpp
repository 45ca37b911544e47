#include "urnsa/montecarlo.hpp"

#include "urnsa/errors.hpp"
#include "urnsa/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace urnsa {

void NeumaierSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

int default_workers() {
  if (const char* env = std::getenv("URNSA_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Ensemble run_replications(const ModelSpec& model, const ReplicationPlan& plan) {
  if (plan.replications < 1) throw InputError("run_replications: need at least one replication");
  const auto R = static_cast<std::size_t>(plan.replications);
  std::vector<Trajectory> runs(R);
  const int workers =
      std::max(1, std::min<int>(plan.workers > 0 ? plan.workers : default_workers(),
                                static_cast<int>(R)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t r = next++; r < R; r = next++) {
        runs[r] = simulate(model, plan.horizon, plan.seed, plan.checkpoints, r);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = R;
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  Ensemble out;
  out.checkpoints = plan.checkpoints;
  for (std::size_t r = 0; r < R; ++r) {
    if (runs[r].status != RunStatus::completed) {
      out.excluded.push_back(r);
    } else {
      out.paths.push_back(std::move(runs[r].checkpoints));
    }
  }
  return out;
}

Vector theta_of(const Checkpoint& cp, bool extended) {
  const Eigen::Index d = cp.y_tilde.size();
  Vector t(extended ? 3 * d : 2 * d);
  if (extended) {
    t << cp.y_tilde, cp.n_tilde, cp.s_tilde;
  } else {
    t << cp.y_tilde, cp.n_tilde;
  }
  return t;
}

Vector vec_generating_matrix(const ModelSpec& model, const Checkpoint& cp) {
  const Matrix H = phi(cp.s_tilde, cp.n_tilde, model.p());
  return Eigen::Map<const Vector>(H.data(), H.size());
}

std::vector<std::int64_t> geometric_checkpoints(std::int64_t first, std::int64_t last, int count) {
  if (first < 1 || last < first || count < 1) throw InputError("geometric_checkpoints: bad range");
  std::vector<std::int64_t> out;
  const double a = std::log(static_cast<double>(first));
  const double b = std::log(static_cast<double>(last));
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 1.0 : static_cast<double>(k) / (count - 1);
    const auto n = static_cast<std::int64_t>(std::llround(std::exp(a + t * (b - a))));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  out.back() = last;
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_normal(std::vector<double> values, double sigma) {
  if (values.empty()) return 0.0;
  if (!(sigma > 0.0)) throw InputError("ks_normal: sigma must be positive");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double F = normal_cdf(values[i] / sigma);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

double regime_scale(const RegimeInfo& regime, double n) {
  switch (regime.regime) {
    case Regime::a: return std::sqrt(n);
    case Regime::b: return std::sqrt(n / std::log(n));
    case Regime::c: return std::pow(n, *regime.beta);
  }
  return std::sqrt(n);
}

EnsembleStats compute_stats(const std::vector<Vector>& samples, const Vector& center,
                            double scale, std::int64_t n, const std::optional<Matrix>& reference) {
  EnsembleStats st;
  st.n = n;
  st.count = static_cast<std::int64_t>(samples.size());
  st.scale = scale;
  const Eigen::Index dim = center.size();
  if (samples.empty()) return st;
  if (reference && (reference->rows() != dim || reference->cols() != dim)) {
    throw InputError("compute_stats: reference covariance has the wrong size");
  }

  const double R = static_cast<double>(samples.size());
  st.mean.resize(dim);
  Vector zmean(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    NeumaierSum s;
    for (const auto& x : samples) s.add(x(i));
    st.mean(i) = s.value() / R;
    zmean(i) = scale * (st.mean(i) - center(i));
  }

  std::vector<std::vector<double>> z(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    auto& col = z[static_cast<std::size_t>(i)];
    col.reserve(samples.size());
    for (const auto& x : samples) col.push_back(scale * (x(i) - center(i)));
  }

  if (samples.size() >= 2) {
    Matrix cov(dim, dim);
    Matrix se(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const auto& zi = z[static_cast<std::size_t>(i)];
        const auto& zj = z[static_cast<std::size_t>(j)];
        NeumaierSum s;
        NeumaierSum s2;
        for (std::size_t r = 0; r < zi.size(); ++r) {
          const double prod = (zi[r] - zmean(i)) * (zj[r] - zmean(j));
          s.add(prod);
          s2.add(prod * prod);
        }
        const double c = s.value() / (R - 1.0);
        const double m = s.value() / R;
        const double var_prod = std::max(0.0, s2.value() / R - m * m);
        cov(i, j) = cov(j, i) = c;
        se(i, j) = se(j, i) = std::sqrt(var_prod / R);
      }
    }
    st.covariance = cov;
    st.covariance_se = se;
  }

  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto& col = z[static_cast<std::size_t>(i)];
    double sigma = 0.0;
    if (reference) {
      sigma = std::sqrt(std::max(0.0, (*reference)(i, i)));
    } else if (st.covariance) {
      sigma = std::sqrt(std::max(0.0, (*st.covariance)(i, i)));
    }
    st.ks.push_back(sigma > 0.0 ? ks_normal(col, sigma) : 0.0);
  }

  if (reference) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (*reference + reference->transpose()));
    const Vector& ev = es.eigenvalues();
    const double tol = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    Vector inv = Vector::Zero(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      if (ev(k) > tol) {
        inv(k) = 1.0 / ev(k);
        ++st.reference_rank;
      }
    }
    const Matrix pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    NeumaierSum s;
    Vector zr(dim);
    for (std::size_t r = 0; r < samples.size(); ++r) {
      for (Eigen::Index i = 0; i < dim; ++i) zr(i) = z[static_cast<std::size_t>(i)][r];
      s.add(zr.dot(pinv * zr));
    }
    st.mahalanobis_mean = s.value() / R;
  }
  return st;
}

ConsistencyReport consistency_check(const Ensemble& ensemble, const Vector& v_star,
                                    const std::optional<Vector>& p, double initial_weight) {
  if (ensemble.paths.empty() || ensemble.checkpoints.empty()) {
    throw InputError("consistency_check: empty ensemble");
  }
  ConsistencyReport rep;
  const std::size_t K = ensemble.checkpoints.size();
  const double R = static_cast<double>(ensemble.paths.size());
  for (std::size_t k = 0; k < K; ++k) {
    NeumaierSum y;
    for (const auto& path : ensemble.paths) {
      const Checkpoint& cp = path[k];
      y.add((cp.y_tilde - v_star).norm());
      const double n = static_cast<double>(cp.n);
      const double expected = n > 0 ? (initial_weight + n) / n : initial_weight;
      rep.max_weight_defect =
          std::max(rep.max_weight_defect, std::abs(cp.y_tilde.sum() - expected));
    }
    rep.y_error_by_checkpoint.push_back(y.value() / R);
  }
  rep.monotone_trend = true;
  for (std::size_t k = 1; k < K; ++k) {
    if (rep.y_error_by_checkpoint[k] > rep.y_error_by_checkpoint[k - 1]) rep.monotone_trend = false;
  }

  const std::size_t last = K - 1;
  rep.n = ensemble.checkpoints[last];
  rep.mean_y_error = rep.y_error_by_checkpoint[last];
  NeumaierSum nerr, serr, perr;
  for (const auto& path : ensemble.paths) {
    const Checkpoint& cp = path[last];
    nerr.add((cp.n_tilde - v_star).norm());
    if (p) {
      serr.add((cp.s_tilde - p->cwiseProduct(v_star)).norm());
      perr.add((cp.pi - *p).norm());
    }
  }
  rep.mean_n_error = nerr.value() / R;
  if (p) {
    rep.mean_s_error = serr.value() / R;
    rep.mean_pi_error = perr.value() / R;
  }
  return rep;
}

RateFit rate_fit(const std::vector<std::int64_t>& n, const std::vector<double>& mean_error) {
  if (n.size() != mean_error.size()) throw InputError("rate_fit: size mismatch");
  if (n.size() < 5) throw InputError("rate_fit: need at least 5 checkpoints");
  RateFit fit;
  fit.n = n;
  fit.mean_error = mean_error;
  const auto m = static_cast<double>(n.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (!(n[k] > 0) || !(mean_error[k] > 0.0)) throw InputError("rate_fit: values must be positive");
    sx += std::log(static_cast<double>(n[k]));
    sy += std::log(mean_error[k]);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    const double dx = std::log(static_cast<double>(n[k])) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(mean_error[k]) - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    const double r = std::log(mean_error[k]) - fit.intercept -
                     fit.slope * std::log(static_cast<double>(n[k]));
    rss += r * r;
  }
  fit.slope_se = std::sqrt(rss / (m - 2.0) / sxx);
  return fit;
}

std::vector<double> mean_error_by_checkpoint(const Ensemble& ensemble, const Vector& theta_star,
                                             bool extended) {
  std::vector<double> out;
  for (std::size_t k = 0; k < ensemble.checkpoints.size(); ++k) {
    NeumaierSum s;
    for (const auto& path : ensemble.paths) s.add((theta_of(path[k], extended) - theta_star).norm());
    out.push_back(s.value() / static_cast<double>(ensemble.paths.size()));
  }
  return out;
}

RegimeBReport regime_b_stabilization(const Ensemble& ensemble, const Vector& theta_star,
                                     double spread_tol) {
  RegimeBReport rep;
  const bool extended = theta_star.size() == 3 * ensemble.paths.front().front().y_tilde.size();
  rep.rate = rate_fit(ensemble.checkpoints, mean_error_by_checkpoint(ensemble, theta_star, extended));
  const double last = static_cast<double>(ensemble.checkpoints.back());
  double sum = 0.0;
  for (std::size_t k = 0; k < ensemble.checkpoints.size(); ++k) {
    const double n = static_cast<double>(ensemble.checkpoints[k]);
    if (n < last / 100.0 * (1.0 - 1e-9)) continue;
    NeumaierSum s;
    for (const auto& path : ensemble.paths) {
      s.add((theta_of(path[k], extended) - theta_star).squaredNorm());
    }
    const double rms = std::sqrt(s.value() / static_cast<double>(ensemble.paths.size()));
    rep.n.push_back(ensemble.checkpoints[k]);
    rep.scaled_rms.push_back(std::sqrt(n / std::log(n)) * rms);
    sum += rep.scaled_rms.back();
  }
  if (rep.scaled_rms.size() < 2) throw InputError("regime_b_stabilization: need checkpoints over two decades");
  const auto [lo, hi] = std::minmax_element(rep.scaled_rms.begin(), rep.scaled_rms.end());
  rep.relative_spread = (*hi - *lo) / (sum / static_cast<double>(rep.scaled_rms.size()));
  rep.pass = rep.relative_spread <= spread_tol && rep.rate.slope > -0.5 && rep.rate.slope < -0.3;
  return rep;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace

RegimeCReport regime_c_stabilization(const Ensemble& ensemble, const Vector& theta_star,
                                     double beta, double ratio_tol) {
  if (ensemble.paths.empty()) throw InputError("regime_c_stabilization: empty ensemble");
  RegimeCReport rep;
  rep.beta = beta;
  const bool extended = theta_star.size() == 3 * ensemble.paths.front().front().y_tilde.size();
  const double last = static_cast<double>(ensemble.checkpoints.back());
  std::vector<std::size_t> window;
  for (std::size_t k = 0; k < ensemble.checkpoints.size(); ++k) {
    if (static_cast<double>(ensemble.checkpoints[k]) >= last / 10.0 * (1.0 - 1e-9)) window.push_back(k);
  }
  if (window.size() < 2) throw InputError("regime_c_stabilization: need checkpoints over a decade");
  std::vector<double> osc, mag;
  for (const auto& path : ensemble.paths) {
    std::vector<Vector> z;
    for (std::size_t k : window) {
      const double n = static_cast<double>(ensemble.checkpoints[k]);
      z.push_back(std::pow(n, beta) * (theta_of(path[k], extended) - theta_star));
    }
    double o = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a) {
      for (std::size_t b = a + 1; b < z.size(); ++b) o = std::max(o, (z[a] - z[b]).norm());
    }
    osc.push_back(o);
    mag.push_back(z.back().norm());
  }
  rep.median_oscillation = median(osc);
  rep.median_magnitude = median(mag);
  rep.ratio = rep.median_magnitude > 0.0 ? rep.median_oscillation / rep.median_magnitude
                                         : std::numeric_limits<double>::infinity();
  rep.pass = rep.ratio <= ratio_tol;
  return rep;
}

UrnState equilibrium_state(const ModelSpec& model, const Vector& v_star, std::int64_t n) {
  UrnState s;
  const double scale = static_cast<double>(n);
  s.n = n;
  s.Y = scale * v_star;
  s.N = scale * v_star;
  s.S = model.bernoulli_responses() ? Vector(scale * model.p().cwiseProduct(v_star))
                                    : Vector(Vector::Zero(v_star.size()));
  s.w = s.Y.sum();
  return s;
}

CovarianceProbe conditional_covariance_probe(const ModelSpec& model, const UrnState& state,
                                             std::int64_t inner, std::uint64_t seed,
                                             bool extended) {
  if (inner < 2) throw InputError("conditional_covariance_probe: need at least two resamples");
  if (extended && !model.bernoulli_responses()) {
    throw InputError("conditional_covariance_probe: success increments need Bernoulli responses");
  }
  const Eigen::Index d = model.dim();
  const Eigen::Index size = extended ? 3 * d : 2 * d;
  const Matrix Hn = model.generating_matrix(state);
  const Vector pi = state.Y / state.w;
  Vector center(size);
  center.head(d) = Hn * pi;
  center.segment(d, d) = pi;
  if (extended) center.tail(d) = model.p().cwiseProduct(pi);

  StreamRng rng(seed, 0);
  std::vector<Vector> samples;
  samples.reserve(static_cast<std::size_t>(inner));
  Vector col(d);
  for (std::int64_t r = 0; r < inner; ++r) {
    const double u = rng.uniform_open_closed();
    const double v = rng.uniform01();
    const Eigen::Index arm = draw(state.Y, u);
    const int outcome = model.sample_outcome(arm, v);
    model.addition_column(arm, outcome, state, col);
    Vector z = Vector::Zero(size);
    z.head(d) = col;
    z(d + arm) = 1.0;
    if (extended) z(2 * d + arm) = model.success_increment(outcome);
    samples.push_back(z - center);
  }
  // Increments are centered at their exact conditional mean.
  CovarianceProbe probe;
  probe.samples = inner;
  probe.covariance = Matrix::Zero(size, size);
  probe.standard_error = Matrix::Zero(size, size);
  const double R = static_cast<double>(inner);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      NeumaierSum s, s2;
      for (const auto& z : samples) {
        const double prod = z(i) * z(j);
        s.add(prod);
        s2.add(prod * prod);
      }
      const double m = s.value() / R;
      probe.covariance(i, j) = probe.covariance(j, i) = m;
      probe.standard_error(i, j) = probe.standard_error(j, i) =
          std::sqrt(std::max(0.0, s2.value() / R - m * m) / R);
    }
  }
  return probe;
}

Matrix finite_horizon_covariance(const Matrix& Dh, const Matrix& Gamma, std::int64_t n) {
  if (n < 1) throw InputError("finite_horizon_covariance: n must be positive");
  const Eigen::Index dim = Dh.rows();
  const Matrix I = Matrix::Identity(dim, dim);
  Matrix C = Matrix::Zero(dim, dim);
  for (std::int64_t k = 1; k < n; ++k) {
    const double step = 1.0 / static_cast<double>(k + 1);
    const Matrix A = I - step * Dh;
    C = A * C * A.transpose() + (step * step) * Gamma;
  }
  return static_cast<double>(n) * C;
}

RemainderDecay remainder_decay(const ModelSpec& model, const Ensemble& ensemble) {
  RemainderDecay out;
  const double R = static_cast<double>(ensemble.paths.size());
  for (std::size_t k = 0; k < ensemble.checkpoints.size(); ++k) {
    const std::int64_t n = ensemble.checkpoints[k];
    if (n < 1) continue;
    NeumaierSum bar, check, tilde;
    for (const auto& path : ensemble.paths) {
      const Checkpoint& cp = path[k];
      UrnState s;
      s.n = n;
      s.Y = cp.y_tilde * static_cast<double>(n);
      s.N = cp.n_tilde * static_cast<double>(n);
      s.S = cp.s_tilde * static_cast<double>(n);
      s.w = cp.w;
      const TheoremRemainders r = theorem_remainders(s, model, model.generating_matrix(s));
      bar.add(r.r_bar.squaredNorm());
      check.add(r.r_check.squaredNorm());
      tilde.add(r.r_tilde.squaredNorm());
    }
    const double scale = static_cast<double>(n) / R;
    out.n.push_back(n);
    out.r_bar.push_back(scale * bar.value());
    out.r_check.push_back(scale * check.value());
    out.r_tilde.push_back(scale * tilde.value());
  }
  auto decreasing = [](const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (v[k] > v[k - 1]) return false;
    }
    return !v.empty();
  };
  out.r_bar_decreasing = decreasing(out.r_bar);
  out.r_check_decreasing = decreasing(out.r_check);
  return out;
}

}  // namespace urnsa
