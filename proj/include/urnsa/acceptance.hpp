#pragma once

// The acceptance suite: nine end-to-end checks of the simulator, the
// enumeration oracle and the limit theorems.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace urnsa {

struct Measurement {
  std::string name;
  double value = 0.0;
  std::string relation;            // "<=", ">=", "==", "in", "info"
  double tolerance = 0.0;          // bound, or lower end for "in"
  std::optional<double> upper;     // upper end for "in"
  bool pass = true;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double runtime_s = 0.0;
  double runtime_limit_s = 0.0;
  std::vector<Measurement> measurements;
  std::vector<std::string> notes;
  std::string error;  // set when the check threw
};

struct AcceptanceOptions {
  bool quick = false;           // R/10 and tolerances widened by √10 (rates: 50 paths, n = 10⁵, ±0.10)
  int workers = 0;              // 0 → default_workers()
  std::uint64_t seed = 2718281828ULL;
  std::vector<int> criteria;    // empty → all nine
};

/// Appends measurements to a result; each method returns the pass flag.
class Recorder {
 public:
  explicit Recorder(CriterionResult& r) : r_(r) {}

  bool le(const std::string& name, double value, double tol) {
    return push({name, value, "<=", tol, std::nullopt, value <= tol});
  }
  bool ge(const std::string& name, double value, double tol) {
    return push({name, value, ">=", tol, std::nullopt, value >= tol});
  }
  bool eq(const std::string& name, double value, double target) {
    return push({name, value, "==", target, std::nullopt, value == target});
  }
  bool in(const std::string& name, double value, double lo, double hi) {
    return push({name, value, "in", lo, hi, value >= lo && value <= hi});
  }
  void info(const std::string& name, double value) {
    push({name, value, "info", 0.0, std::nullopt, true});
  }
  void note(std::string text) { r_.notes.push_back(std::move(text)); }

 private:
  bool push(Measurement m) {
    const bool ok = m.pass;
    r_.measurements.push_back(std::move(m));
    return ok;
  }
  CriterionResult& r_;
};

/// Title of criterion `id` (1..9).
std::string criterion_name(int id);

CriterionResult run_criterion(int id, const AcceptanceOptions& options);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

}  // namespace urnsa
