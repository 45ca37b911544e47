#include "urnsa/config.hpp"

#include "urnsa/errors.hpp"
#include "urnsa/montecarlo.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

namespace urnsa {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_as(const json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + " has the wrong type");
  }
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

std::int64_t get_count(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < 0) throw ConfigError(where + " must be nonnegative");
  return x;
}

std::vector<double> get_vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_number(x, where));
  return out;
}

ColumnDistribution get_column_law(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a non-empty array");
  ColumnDistribution law;
  for (const auto& point : v) {
    check_keys(point, where, {"probability", "column"});
    if (!point.contains("probability") || !point.contains("column")) {
      throw ConfigError(where + " entries need 'probability' and 'column'");
    }
    law.push_back({get_number(point["probability"], where + ".probability"),
                   from_std(get_vector(point["column"], where + ".column"))});
  }
  return law;
}

json column_law_json(const ColumnDistribution& law) {
  json out = json::array();
  for (const auto& o : law) out.push_back({{"probability", o.probability}, {"column", to_std(o.column)}});
  return out;
}

void parse_model(const json& m, ModelConfig& out) {
  check_keys(m, "model", {"kind", "p", "Y0", "N0", "S0", "c", "columns", "lattice"});
  if (m.contains("kind")) {
    try {
      out.kind = parse_model_kind(get_as<std::string>(m["kind"], "model.kind"));
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  }
  if (m.contains("p")) out.p = get_vector(m["p"], "model.p");
  if (m.contains("Y0")) out.y0 = get_vector(m["Y0"], "model.Y0");
  if (m.contains("N0")) out.n0 = get_vector(m["N0"], "model.N0");
  if (m.contains("S0")) out.s0 = get_vector(m["S0"], "model.S0");
  if (m.contains("c")) out.c = get_number(m["c"], "model.c");
  if (m.contains("columns")) {
    if (!m["columns"].is_array()) throw ConfigError("model.columns must be an array");
    out.columns.clear();
    for (std::size_t j = 0; j < m["columns"].size(); ++j) {
      out.columns.push_back(get_column_law(m["columns"][j], "model.columns[" + std::to_string(j) + "]"));
    }
  }
  if (m.contains("lattice")) out.lattice = get_vector(m["lattice"], "model.lattice");
}

void parse_simulate(const json& s, SimulateConfig& out) {
  check_keys(s, "simulate", {"horizon", "checkpoints", "checkpoint_every", "seed", "replications", "workers"});
  if (s.contains("horizon")) out.horizon = get_count(s["horizon"], "simulate.horizon");
  if (s.contains("checkpoints")) {
    if (!s["checkpoints"].is_array()) throw ConfigError("simulate.checkpoints must be an array");
    out.checkpoints.clear();
    for (const auto& c : s["checkpoints"]) out.checkpoints.push_back(get_count(c, "simulate.checkpoints"));
  }
  if (s.contains("checkpoint_every")) {
    out.checkpoint_every = get_count(s["checkpoint_every"], "simulate.checkpoint_every");
    if (out.checkpoint_every < 1) throw ConfigError("simulate.checkpoint_every must be positive");
  }
  if (s.contains("seed")) {
    if (!s["seed"].is_number_unsigned() && !s["seed"].is_number_integer()) {
      throw ConfigError("simulate.seed must be an integer");
    }
    if (s["seed"].is_number_integer() && s["seed"].get<std::int64_t>() < 0) {
      throw ConfigError("simulate.seed must be nonnegative");
    }
    out.seed = s["seed"].get<std::uint64_t>();
  }
  if (s.contains("replications")) {
    out.replications = get_count(s["replications"], "simulate.replications");
    if (out.replications < 1) throw ConfigError("simulate.replications must be positive");
  }
  if (s.contains("workers")) out.workers = static_cast<int>(get_count(s["workers"], "simulate.workers"));
}

void parse_validate(const json& v, ValidateConfig& out) {
  check_keys(v, "validate", {"criteria", "quick", "statistics", "tolerances"});
  if (v.contains("criteria")) {
    if (!v["criteria"].is_array()) throw ConfigError("validate.criteria must be an array");
    std::vector<int> ids;
    for (const auto& c : v["criteria"]) {
      const auto id = get_count(c, "validate.criteria");
      if (id < 1 || id > 9) throw ConfigError("validate.criteria entries must be between 1 and 9");
      ids.push_back(static_cast<int>(id));
    }
    out.criteria = ids;
  }
  if (v.contains("quick")) {
    if (!v["quick"].is_boolean()) throw ConfigError("validate.quick must be a boolean");
    out.quick = v["quick"].get<bool>();
  }
  const auto& known = known_statistics();
  if (v.contains("statistics")) {
    if (!v["statistics"].is_array()) throw ConfigError("validate.statistics must be an array");
    out.statistics.clear();
    for (const auto& s : v["statistics"]) {
      const auto name = get_as<std::string>(s, "validate.statistics");
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw ConfigError("unknown statistic '" + name + "'");
      }
      out.statistics.push_back(name);
    }
  }
  if (v.contains("tolerances")) {
    if (!v["tolerances"].is_object()) throw ConfigError("validate.tolerances must be an object");
    for (const auto& item : v["tolerances"].items()) {
      if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
        throw ConfigError("unknown statistic '" + item.key() + "' in validate.tolerances");
      }
      const double t = get_number(item.value(), "validate.tolerances." + item.key());
      if (!(t > 0.0)) throw ConfigError("tolerances must be positive");
      out.tolerances[item.key()] = t;
    }
  }
}

void parse_output(const json& o, OutputConfig& out) {
  check_keys(o, "output", {"directory", "formats"});
  if (o.contains("directory")) out.directory = get_as<std::string>(o["directory"], "output.directory");
  if (o.contains("formats")) {
    if (!o["formats"].is_array()) throw ConfigError("output.formats must be an array");
    out.formats.clear();
    for (const auto& f : o["formats"]) {
      const auto name = get_as<std::string>(f, "output.formats");
      if (name != "csv" && name != "json") throw ConfigError("unknown output format '" + name + "'");
      out.formats.push_back(name);
    }
  }
}

}  // namespace

const std::vector<std::string>& known_statistics() {
  static const std::vector<std::string> names = {"consistency", "clt",      "regime_b",
                                                 "regime_c",    "gammaH",   "remainder_decay"};
  return names;
}

double default_tolerance(const std::string& statistic) {
  if (statistic == "consistency") return 0.02;
  if (statistic == "clt") return 0.10;
  if (statistic == "regime_b") return 0.25;
  if (statistic == "regime_c") return 0.25;
  if (statistic == "gammaH") return 0.20;
  if (statistic == "remainder_decay") return 1.0;
  throw ConfigError("unknown statistic '" + statistic + "'");
}

RunConfig parse_config(const json& doc, RunConfig base) {
  check_keys(doc, "config", {"preset", "model", "simulate", "validate", "oracle", "output"});
  RunConfig cfg = std::move(base);
  if (doc.contains("preset")) {
    cfg = preset_config(get_as<std::string>(doc["preset"], "preset"));
  }
  if (doc.contains("model")) parse_model(doc["model"], cfg.model);
  if (doc.contains("simulate")) parse_simulate(doc["simulate"], cfg.simulate);
  if (doc.contains("validate")) parse_validate(doc["validate"], cfg.validate);
  if (doc.contains("oracle")) {
    check_keys(doc["oracle"], "oracle", {"horizon"});
    if (doc["oracle"].contains("horizon")) {
      cfg.oracle.horizon = static_cast<int>(get_count(doc["oracle"]["horizon"], "oracle.horizon"));
    }
  }
  if (doc.contains("output")) parse_output(doc["output"], cfg.output);

  // Cross-field checks that do not need the model built.
  for (std::size_t k = 0; k < cfg.simulate.checkpoints.size(); ++k) {
    if (cfg.simulate.checkpoints[k] > cfg.simulate.horizon) {
      throw ConfigError("simulate.checkpoints must not exceed the horizon");
    }
    if (k > 0 && cfg.simulate.checkpoints[k] <= cfg.simulate.checkpoints[k - 1]) {
      throw ConfigError("simulate.checkpoints must be strictly increasing");
    }
  }
  build_model(cfg.model);
  return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, std::move(base));
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"figure1", "wei-clt", "bhs-clt", "regime-b",
                                                 "regime-c"};
  return names;
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;
  cfg.preset = name;
  if (name == "figure1") {
    cfg.model.kind = ModelKind::bhs;
    cfg.model.p = {0.5, 0.7};
    cfg.model.y0 = {0.5, 0.5};
    cfg.model.n0 = {1.0, 1.0};
    cfg.model.s0 = {1.0, 1.0};
    cfg.simulate.horizon = 2000;
    cfg.simulate.checkpoint_every = 1;
    cfg.simulate.replications = 1;
    cfg.validate.statistics = {"consistency"};
  } else if (name == "wei-clt") {
    cfg.model.kind = ModelKind::wei;
    cfg.model.p = {0.5, 0.7};
    cfg.simulate.horizon = 10000;
    cfg.simulate.checkpoints = {10000};
    cfg.simulate.replications = 10000;
    cfg.validate.statistics = {"consistency", "clt"};
  } else if (name == "bhs-clt") {
    cfg.model.kind = ModelKind::bhs;
    cfg.model.p = {0.5, 0.6, 0.7};
    cfg.simulate.horizon = 10000;
    cfg.simulate.checkpoints = {10000};
    cfg.simulate.replications = 10000;
    cfg.validate.statistics = {"clt", "gammaH"};
  } else if (name == "regime-b" || name == "regime-c") {
    cfg.model.kind = ModelKind::wei;
    cfg.model.p = name == "regime-b" ? std::vector<double>{0.7, 0.8} : std::vector<double>{0.9, 0.8};
    cfg.simulate.horizon = 1000000;
    cfg.simulate.checkpoints = geometric_checkpoints(1000, 1000000, 13);
    cfg.simulate.replications = 200;
    cfg.validate.statistics = {name == "regime-b" ? "regime_b" : "regime_c"};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  cfg.validate.criteria = std::vector<int>{};
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json model = {{"kind", to_string(cfg.model.kind)}, {"c", cfg.model.c}};
  if (!cfg.model.p.empty()) model["p"] = cfg.model.p;
  if (!cfg.model.y0.empty()) model["Y0"] = cfg.model.y0;
  if (!cfg.model.n0.empty()) model["N0"] = cfg.model.n0;
  if (!cfg.model.s0.empty()) model["S0"] = cfg.model.s0;
  if (!cfg.model.columns.empty()) {
    json cols = json::array();
    for (const auto& law : cfg.model.columns) cols.push_back(column_law_json(law));
    model["columns"] = cols;
  }
  if (!cfg.model.lattice.empty()) model["lattice"] = cfg.model.lattice;
  json simulate = {{"horizon", cfg.simulate.horizon},
                   {"checkpoint_every", cfg.simulate.checkpoint_every},
                   {"seed", cfg.simulate.seed},
                   {"replications", cfg.simulate.replications},
                   {"workers", cfg.simulate.workers}};
  if (!cfg.simulate.checkpoints.empty()) simulate["checkpoints"] = cfg.simulate.checkpoints;
  json validate = {{"quick", cfg.validate.quick}, {"statistics", cfg.validate.statistics},
                   {"tolerances", cfg.validate.tolerances}};
  if (cfg.validate.criteria) validate["criteria"] = *cfg.validate.criteria;
  json out = {{"model", model},
              {"simulate", simulate},
              {"validate", validate},
              {"oracle", {{"horizon", cfg.oracle.horizon}}},
              {"output", {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}}}};
  if (!cfg.preset.empty()) out["preset"] = cfg.preset;
  return out;
}

ModelSpec build_model(const ModelConfig& config) {
  std::optional<InitialComposition> init;
  if (!config.y0.empty() || !config.n0.empty() || !config.s0.empty()) {
    init = InitialComposition{from_std(config.y0), from_std(config.n0), from_std(config.s0)};
  }
  try {
    switch (config.kind) {
      case ModelKind::wei: return wei_model(from_std(config.p), init);
      case ModelKind::bhs: return bhs_model(from_std(config.p), init);
      case ModelKind::homogeneous: return homogeneous_model(config.columns, config.c, init);
      case ModelKind::removal:
        return removal_model(config.columns, config.c, from_std(config.lattice), init);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
  throw ConfigError("invalid model kind");
}

std::vector<std::int64_t> resolve_checkpoints(const SimulateConfig& config) {
  if (!config.checkpoints.empty()) return config.checkpoints;
  std::vector<std::int64_t> out;
  for (std::int64_t n = config.checkpoint_every; n <= config.horizon; n += config.checkpoint_every) {
    out.push_back(n);
  }
  if (config.horizon > 0 && (out.empty() || out.back() != config.horizon)) out.push_back(config.horizon);
  return out;
}

int resolve_workers(int configured) {
  if (const char* env = std::getenv("URNSA_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return configured > 0 ? configured : default_workers();
}

}  // namespace urnsa
