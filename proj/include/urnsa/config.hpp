#pragma once

// Run configuration: JSON schema, defaults and named presets.

#include "urnsa/models.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace urnsa {

struct ModelConfig {
  ModelKind kind = ModelKind::wei;
  std::vector<double> p;
  std::vector<double> y0, n0, s0;  // empty → defaults (Y₀ = 𝟙/d, N₀ = S₀ = 𝟙)
  double c = 1.0;
  std::vector<ColumnDistribution> columns;
  std::vector<double> lattice;
};

struct SimulateConfig {
  std::int64_t horizon = 2000;
  std::vector<std::int64_t> checkpoints;  // empty → every `checkpoint_every` steps
  std::int64_t checkpoint_every = 1;
  std::uint64_t seed = 1;
  std::int64_t replications = 1;
  int workers = 0;
};

struct ValidateConfig {
  std::optional<std::vector<int>> criteria;
  bool quick = false;
  std::vector<std::string> statistics;
  std::map<std::string, double> tolerances;
};

struct OracleConfig {
  int horizon = 1;
};

struct OutputConfig {
  std::string directory = "urnsa-out";
  std::vector<std::string> formats = {"csv", "json"};
};

struct RunConfig {
  std::string preset;  // name of the preset it came from, if any
  ModelConfig model;
  SimulateConfig simulate;
  ValidateConfig validate;
  OracleConfig oracle;
  OutputConfig output;
};

/// Statistic names accepted in validate.statistics.
const std::vector<std::string>& known_statistics();
/// Default tolerance of a statistic.
double default_tolerance(const std::string& statistic);

/// Parses and validates a configuration document; missing fields take the
/// defaults of `base`. Throws ConfigError on unknown keys, wrong types or
/// invalid values.
RunConfig parse_config(const nlohmann::json& doc, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Preset names: figure1, wei-clt, bhs-clt, regime-b, regime-c.
const std::vector<std::string>& preset_names();
RunConfig preset_config(const std::string& name);

nlohmann::json to_json(const RunConfig& config);

/// Builds the model; construction errors are reported as ConfigError.
ModelSpec build_model(const ModelConfig& config);

/// Checkpoint list for a simulate section.
std::vector<std::int64_t> resolve_checkpoints(const SimulateConfig& config);

/// URNSA_WORKERS when set, else the configured count, else the hardware count.
int resolve_workers(int configured);

}  // namespace urnsa
