#include "urnsa/commands.hpp"

#include "urnsa/asymptotics.hpp"
#include "urnsa/errors.hpp"
#include "urnsa/montecarlo.hpp"
#include "urnsa/oracle.hpp"
#include "urnsa/report_io.hpp"
#include "urnsa/urn.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <thread>

namespace urnsa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double tolerance_of(const RunConfig& cfg, const std::string& statistic) {
  const auto it = cfg.validate.tolerances.find(statistic);
  return it != cfg.validate.tolerances.end() ? it->second : default_tolerance(statistic);
}

void write_report(const fs::path& path, const json& report) {
  const auto problems = schema_problems(report);
  if (!problems.empty()) throw NumericalError("report fails its own schema: " + problems.front());
  write_file(path, report.dump(2) + "\n");
}

// Runs the body and turns the error classes into exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OracleSizeError& e) {
    err << "refused: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

Vector vec_of(const Matrix& A) { return Eigen::Map<const Vector>(A.data(), A.size()); }

void consistency_statistic(const RunConfig& cfg, const ModelSpec& model, const AsymptoticsBundle& b,
                           const Ensemble& e, Recorder& rec) {
  const double tol = tolerance_of(cfg, "consistency");
  std::optional<Vector> p;
  if (model.bernoulli_responses()) p = model.p();
  const ConsistencyReport r = consistency_check(e, b.v_star, p, model.initial().y0.sum());
  rec.le("mean |Ytilde_n - v*|", r.mean_y_error, tol);
  rec.le("mean |Ntilde_n - v*|", r.mean_n_error, tol);
  if (r.mean_s_error) rec.info("mean |Stilde_n - diag(p)v*|", *r.mean_s_error);
  if (r.mean_pi_error) rec.info("mean |Pi_n - p|", *r.mean_pi_error);
  rec.le("max weight defect", r.max_weight_defect, 1e-12);
}

void clt_statistic(const RunConfig& cfg, const AsymptoticsBundle& b, const Ensemble& e,
                   Recorder& rec) {
  if (!b.Sigma) {
    rec.note("no Sigma outside regime a (" + b.sigma_omitted_reason + ")");
    rec.eq("Sigma available", 0.0, 1.0);
    return;
  }
  const std::int64_t n = e.checkpoints.back();
  std::vector<Vector> xs;
  for (const auto& path : e.paths) xs.push_back(theta_of(path.back(), b.extended));
  const EnsembleStats st = compute_stats(xs, b.theta_star, std::sqrt(double(n)), n, *b.Sigma);
  rec.le("relative Frobenius error vs Sigma", relative_frobenius(*st.covariance, *b.Sigma),
         tolerance_of(cfg, "clt"));
  for (std::size_t k = 0; k < st.ks.size(); ++k) rec.info("KS coordinate " + std::to_string(k + 1), st.ks[k]);
  if (st.mahalanobis_mean) {
    rec.info("mean Mahalanobis distance", *st.mahalanobis_mean);
    rec.info("reference rank", st.reference_rank);
  }
}

void gamma_h_statistic(const RunConfig& cfg, const ModelSpec& model, const AsymptoticsBundle& b,
                       const Ensemble& e, Recorder& rec) {
  if (!b.Gamma_H) {
    rec.note("Gamma_H exists for the BHS design only");
    rec.eq("Gamma_H available", 0.0, 1.0);
    return;
  }
  const std::int64_t n = e.checkpoints.back();
  std::vector<Vector> hs;
  for (const auto& path : e.paths) hs.push_back(vec_generating_matrix(model, path.back()));
  const EnsembleStats st = compute_stats(hs, vec_of(b.H), std::sqrt(double(n)), n, *b.Gamma_H);
  const auto idx = gamma_h_support(model.dim());
  const Matrix ref = principal_submatrix(*b.Gamma_H, idx);
  if (ref.norm() > 0.0) {
    rec.le("relative Frobenius error vs Gamma_H (varying entries)",
           relative_frobenius(principal_submatrix(*st.covariance, idx), ref), tolerance_of(cfg, "gammaH"));
  } else {
    rec.info("standard error of the empirical covariance norm", st.covariance_se->norm());
    rec.le("|empirical covariance|_F minus 3 standard errors",
           st.covariance->norm() - 3.0 * st.covariance_se->norm(), 0.0);
  }
}

void remainder_statistic(const ModelSpec& model, const Ensemble& e, Recorder& rec) {
  const RemainderDecay r = remainder_decay(model, e);
  for (std::size_t k = 0; k < r.n.size(); ++k) {
    const std::string at = " at n=" + std::to_string(r.n[k]);
    rec.info("n E|r_bar|^2" + at, r.r_bar[k]);
    rec.info("n E|r_check|^2" + at, r.r_check[k]);
    rec.info("n E|r_tilde|^2" + at, r.r_tilde[k]);
  }
  rec.eq("n E|r_bar|^2 decreasing", r.r_bar_decreasing ? 1.0 : 0.0, 1.0);
  rec.eq("n E|r_check|^2 decreasing", r.r_check_decreasing ? 1.0 : 0.0, 1.0);
}

}  // namespace

RunConfig resolve_config(const CommandOptions& o) {
  RunConfig cfg = preset_config(o.preset.value_or("figure1"));
  if (!o.preset) cfg.preset.clear();
  if (o.config_path) cfg = load_config(*o.config_path, cfg);
  if (o.out) cfg.output.directory = *o.out;
  if (o.quick) cfg.validate.quick = true;
  if (o.workers) {
    if (*o.workers < 1) throw ConfigError("--workers must be positive");
    cfg.simulate.workers = *o.workers;
  }
  if (!o.criteria.empty()) {
    for (int id : o.criteria) {
      if (id < 1 || id > 9) throw ConfigError("criteria must be between 1 and 9");
    }
    cfg.validate.criteria = o.criteria;
  }
  return cfg;
}

std::vector<CriterionResult> run_statistics(const RunConfig& cfg) {
  std::vector<CriterionResult> results;
  if (cfg.validate.statistics.empty()) return results;
  const ModelSpec model = build_model(cfg.model);
  const AsymptoticsBundle b = compute_asymptotics(model);
  const int workers = resolve_workers(cfg.simulate.workers);
  auto cps = resolve_checkpoints(cfg.simulate);
  if (cps.empty()) throw ConfigError("statistics need a positive horizon");
  const std::int64_t reps = cfg.validate.quick ? std::max<std::int64_t>(2, cfg.simulate.replications / 10)
                                               : cfg.simulate.replications;
  const Ensemble e = run_replications(model, {cfg.simulate.horizon, reps, cps, cfg.simulate.seed, workers});
  if (e.paths.empty()) throw NumericalError("every replication stopped early");

  for (const std::string& name : cfg.validate.statistics) {
    CriterionResult r;
    r.name = name;
    Recorder rec(r);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (!e.excluded.empty()) rec.info("replications stopped early", double(e.excluded.size()));
      if (name == "consistency") {
        consistency_statistic(cfg, model, b, e, rec);
      } else if (name == "clt") {
        clt_statistic(cfg, b, e, rec);
      } else if (name == "regime_b") {
        const RegimeBReport rb = regime_b_stabilization(e, b.theta_star, tolerance_of(cfg, "regime_b"));
        rec.le("relative spread of sqrt(n/log n) RMS", rb.relative_spread, tolerance_of(cfg, "regime_b"));
        rec.in("log-log slope of the mean error", rb.rate.slope, -0.5, -0.3);
      } else if (name == "regime_c") {
        if (!b.regime.beta) {
          rec.note("design is not in regime c");
          rec.eq("regime c", 0.0, 1.0);
        } else {
          const RegimeCReport rc =
              regime_c_stabilization(e, b.theta_star, *b.regime.beta, tolerance_of(cfg, "regime_c"));
          rec.info("beta", rc.beta);
          rec.le("oscillation / magnitude of n^beta (theta_n - theta*)", rc.ratio,
                 tolerance_of(cfg, "regime_c"));
        }
      } else if (name == "gammaH") {
        gamma_h_statistic(cfg, model, b, e, rec);
      } else if (name == "remainder_decay") {
        remainder_statistic(model, e, rec);
      }
    } catch (const Error& ex) {
      r.error = ex.what();
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = r.error.empty();
    for (const auto& m : r.measurements) r.pass = r.pass && m.pass;
    results.push_back(std::move(r));
  }
  return results;
}

int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(options);
    const ModelSpec model = build_model(cfg.model);
    const auto cps = resolve_checkpoints(cfg.simulate);
    const fs::path dir = cfg.output.directory;
    prepare_output_directory(dir);

    const auto reps = static_cast<std::size_t>(cfg.simulate.replications);
    std::vector<Trajectory> runs(reps);
    const int workers = std::max(1, std::min<int>(resolve_workers(cfg.simulate.workers), int(reps)));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < reps; r = next++) {
          try {
            runs[r] = simulate(model, cfg.simulate.horizon, cfg.simulate.seed, cps, r);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    const bool csv = std::find(cfg.output.formats.begin(), cfg.output.formats.end(), "csv") !=
                     cfg.output.formats.end();
    std::vector<std::string> files;
    if (csv) {
      for (std::size_t r = 0; r < reps; ++r) {
        const std::string name = "trajectory_" + std::to_string(r) + ".csv";
        write_file(dir / name, trajectory_csv(runs[r]));
        files.push_back(name);
      }
    }
    write_report(dir / "manifest.json", run_manifest(cfg, "simulate", files, runs));
    std::size_t stopped = 0;
    for (const auto& t : runs) stopped += t.status != RunStatus::completed;
    out << "simulated " << reps << " trajectories of " << cfg.simulate.horizon << " steps into "
        << dir.string() << (stopped ? " (" + std::to_string(stopped) + " stopped early)" : "") << "\n";
    return kExitOk;
  });
}

int cmd_asymptotics(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(options);
    const ModelSpec model = build_model(cfg.model);
    const fs::path dir = cfg.output.directory;
    prepare_output_directory(dir);
    const fs::path path = dir / "asymptotics.json";
    if (model.kind() == ModelKind::removal) {
      write_report(path, asymptotics_error_report("unsupported_design",
                                                  "asymptotics cover wei, bhs and homogeneous designs",
                                                  nullptr));
      err << "asymptotics cover wei, bhs and homogeneous designs\n";
      return kExitConfig;
    }
    const AssumptionReport assumptions = check_assumptions(model);
    if (!assumptions.holds("A3")) {
      write_report(path, asymptotics_error_report("A3_fails", "A3 fails: reducible", &assumptions));
      err << "A3 fails: reducible\n";
      return kExitFailure;
    }
    try {
      const AsymptoticsBundle b = compute_asymptotics(model);
      write_report(path, asymptotics_report(b));
      out << "regime " << to_string(b.regime.regime) << ", v* = " << b.v_star.transpose().format(
                 Eigen::IOFormat(Eigen::StreamPrecision, 0, ", ", ", ", "", "", "(", ")"))
          << "; report in " << path.string() << "\n";
      return kExitOk;
    } catch (const InputError&) {
      throw;
    } catch (const Error& e) {
      write_report(path, asymptotics_error_report("numerical_failure", e.what(), &assumptions));
      throw;
    }
  });
}

int cmd_validate(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = resolve_config(options);
    // Without a preset or a config the default plan is the whole acceptance suite.
    const bool bare = !options.preset && !options.config_path;
    if (bare) cfg.validate.statistics.clear();
    const std::vector<int> all = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> criteria;
    if (!options.criteria.empty()) {
      criteria = options.criteria;
    } else if (bare) {
      criteria = all;
    } else if (cfg.validate.criteria) {
      criteria = *cfg.validate.criteria;
    } else if (cfg.validate.statistics.empty()) {
      criteria = all;
    }

    const fs::path dir = cfg.output.directory;
    prepare_output_directory(dir);

    AcceptanceOptions ao;
    ao.quick = cfg.validate.quick;
    ao.workers = resolve_workers(cfg.simulate.workers);
    ao.criteria = criteria;
    std::vector<CriterionResult> results;
    if (!criteria.empty()) results = run_acceptance(ao);
    for (const auto& r : results) {
      out << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << "  " << r.name << "  ("
          << std::fixed << std::setprecision(2) << r.runtime_s << " s)\n";
    }
    const std::vector<CriterionResult> stats = run_statistics(cfg);
    for (const auto& r : stats) {
      out << (r.pass ? "PASS" : "FAIL") << "  statistic " << r.name << "  (" << std::fixed
          << std::setprecision(2) << r.runtime_s << " s)\n";
    }
    const json report = validation_report(results, stats, ao.quick,
                                          criteria.empty() ? cfg.simulate.seed : ao.seed, ao.workers);
    write_report(dir / "validation.json", report);
    return report["pass"].get<bool>() ? kExitOk : kExitFailure;
  });
}

int cmd_oracle(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(options);
    const ModelSpec model = build_model(cfg.model);
    const fs::path dir = cfg.output.directory;
    prepare_output_directory(dir);
    const ExactLaw law = enumerate_exact(model, cfg.oracle.horizon);
    write_report(dir / "oracle.json", oracle_report(law, model));
    out << law.outcomes.size() << " outcomes (" << law.raw_paths << " paths), total mass "
        << std::setprecision(17) << law.total_mass << "\n";
    return kExitOk;
  });
}

int run_command(const std::string& command, const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
  if (command == "simulate") return cmd_simulate(options, out, err);
  if (command == "asymptotics") return cmd_asymptotics(options, out, err);
  if (command == "validate") return cmd_validate(options, out, err);
  if (command == "oracle") return cmd_oracle(options, out, err);
  err << "unknown command '" << command << "'\n";
  return kExitConfig;
}

}  // namespace urnsa
