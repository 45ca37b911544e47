#pragma once

// Replicated trajectories and the estimators used to validate the limit
// theorems against the closed-form objects.

#include "urnsa/asymptotics.hpp"
#include "urnsa/linalg.hpp"
#include "urnsa/models.hpp"
#include "urnsa/urn.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace urnsa {

/// Compensated (Neumaier) running sum.
class NeumaierSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Worker count: URNSA_WORKERS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int default_workers();

struct ReplicationPlan {
  std::int64_t horizon = 0;
  std::int64_t replications = 0;
  std::vector<std::int64_t> checkpoints;  // strictly increasing, ≤ horizon
  std::uint64_t seed = 0;
  int workers = 0;                        // 0 → default_workers()
};

/// Checkpoints of every replication. Replication r uses stream r of the
/// master seed, so the content does not depend on the worker count.
struct Ensemble {
  std::vector<std::int64_t> checkpoints;
  std::vector<std::vector<Checkpoint>> paths;  // completed replications, in stream order
  std::vector<std::uint64_t> excluded;         // streams that went extinct or untenable
};

Ensemble run_replications(const ModelSpec& model, const ReplicationPlan& plan);

/// (Ỹ, Ñ) or (Ỹ, Ñ, S̃) of one checkpoint.
Vector theta_of(const Checkpoint& cp, bool extended);
/// vec(H_{n+1}) of the BHS design at a checkpoint (column-major).
Vector vec_generating_matrix(const ModelSpec& model, const Checkpoint& cp);

/// Geometric grid of `count` checkpoints from `first` to `last`, rounded and
/// deduplicated.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t first, std::int64_t last, int count);

struct EnsembleStats {
  std::int64_t n = 0;
  std::int64_t count = 0;
  double scale = 1.0;                       // normalization applied to x − center
  Vector mean;                              // mean of the raw samples
  std::optional<Matrix> covariance;         // covariance of scale·(x − center); absent when count < 2
  std::optional<Matrix> covariance_se;      // entrywise standard errors of `covariance`
  std::vector<double> ks;                   // per-coordinate KS distance
  std::optional<double> mahalanobis_mean;   // mean of zᵀΣ⁺z (reference required)
  int reference_rank = 0;
};

/// Statistics of scale·(x − center) over the samples. KS distances use the
/// reference variances when given (coordinates with zero reference variance
/// get KS = 0 when their sample variance vanishes too), the sample variances
/// otherwise.
EnsembleStats compute_stats(const std::vector<Vector>& samples, const Vector& center,
                            double scale, std::int64_t n,
                            const std::optional<Matrix>& reference = std::nullopt);

/// Kolmogorov–Smirnov distance between the samples and N(0, sigma²).
double ks_normal(std::vector<double> values, double sigma);

double normal_cdf(double x);

/// Regime normalization at step n: √n, √(n/ln n) or n^β.
double regime_scale(const RegimeInfo& regime, double n);

struct ConsistencyReport {
  std::int64_t n = 0;             // latest checkpoint
  double mean_y_error = 0.0;      // ensemble mean ‖Ỹ_n − v*‖
  double mean_n_error = 0.0;      // ensemble mean ‖Ñ_n − v*‖
  std::optional<double> mean_s_error;   // ‖S̃_n − diag(p)v*‖ (Bernoulli designs)
  std::optional<double> mean_pi_error;  // ‖Π_n − p‖ (Bernoulli designs)
  std::vector<double> y_error_by_checkpoint;
  bool monotone_trend = false;    // mean ‖Ỹ_n − v*‖ non-increasing across checkpoints
  double max_weight_defect = 0.0; // max |w(Ỹ_n) − (w(Y₀)+n)/n|
};

ConsistencyReport consistency_check(const Ensemble& ensemble, const Vector& v_star,
                                    const std::optional<Vector>& p, double initial_weight);

struct RateFit {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  std::vector<std::int64_t> n;
  std::vector<double> mean_error;
};

/// Least-squares slope of log(mean error) against log n. Needs ≥ 5 points.
RateFit rate_fit(const std::vector<std::int64_t>& n, const std::vector<double>& mean_error);

/// Ensemble mean of ‖θ_n − θ*‖ at every checkpoint.
std::vector<double> mean_error_by_checkpoint(const Ensemble& ensemble, const Vector& theta_star,
                                             bool extended);

struct RegimeBReport {
  std::vector<std::int64_t> n;
  std::vector<double> scaled_rms;  // √(n/ln n)·RMS‖θ_n − θ*‖ over the last two decades
  double relative_spread = 0.0;    // (max − min)/mean of scaled_rms
  RateFit rate;
  bool pass = false;
};

/// √(n/ln n) stabilization: scaled RMS varies by at most `spread_tol`
/// (relative) over the last two decades of checkpoints and the raw error
/// slope lies strictly between −1/2 and −0.3.
RegimeBReport regime_b_stabilization(const Ensemble& ensemble, const Vector& theta_star,
                                     double spread_tol = 0.25);

struct RegimeCReport {
  double beta = 0.0;
  double median_oscillation = 0.0;  // per path: max_{n,m} ‖z_n − z_m‖ over the last decade
  double median_magnitude = 0.0;    // per path: ‖z_N‖ at the last checkpoint
  double ratio = 0.0;
  bool pass = false;
};

/// Cauchy stabilization of z_n = n^β(θ_n − θ*) along each path over the last
/// decade of checkpoints; passes when the median oscillation is at most
/// `ratio_tol` times the median magnitude.
RegimeCReport regime_c_stabilization(const Ensemble& ensemble, const Vector& theta_star,
                                     double beta, double ratio_tol = 0.25);

struct CovarianceProbe {
  Matrix covariance;     // empirical one-step covariance of the stacked increments
  Matrix standard_error; // entrywise standard errors
  std::int64_t samples = 0;
};

/// Resamples one step from `state` `inner` times and returns the empirical
/// covariance of (ΔM, ΔM̃) or (ΔM, ΔM̃, ΔM̂).
CovarianceProbe conditional_covariance_probe(const ModelSpec& model, const UrnState& state,
                                             std::int64_t inner, std::uint64_t seed,
                                             bool extended);

/// State with Y = n·v*, N = n·v*, S = n·diag(p)v* (Π = p), i.e. θ at equilibrium.
UrnState equilibrium_state(const ModelSpec& model, const Vector& v_star, std::int64_t n);

/// n·Cov(θ_n) of the linearized recursion θ_{k+1} − θ* = (I − Dh/(k+1))(θ_k − θ*) +
/// ΔM_{k+1}/(k+1) with Cov(ΔM) = Γ, started from a deterministic θ_1. This is
/// the covariance the ensemble should show at a finite horizon n.
Matrix finite_horizon_covariance(const Matrix& Dh, const Matrix& Gamma, std::int64_t n);

struct RemainderDecay {
  std::vector<std::int64_t> n;
  std::vector<double> r_bar;    // n·E‖r̄_{n+1}‖²
  std::vector<double> r_check;  // n·E‖ř_{n+1}‖²
  std::vector<double> r_tilde;  // n·E‖r̃_{n+1}‖²
  bool r_bar_decreasing = false;
  bool r_check_decreasing = false;
};

/// Ensemble estimates of the scaled squared remainders at each checkpoint.
RemainderDecay remainder_decay(const ModelSpec& model, const Ensemble& ensemble);

}  // namespace urnsa
