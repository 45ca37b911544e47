#include "urnsa/report_io.hpp"

#include "urnsa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#ifndef URNSA_VERSION
#define URNSA_VERSION "unknown"
#endif

namespace urnsa {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

json header(const std::string& type) {
  return {{"report", type}, {"schema_version", kSchemaVersion}, {"version", code_version()}};
}

// JSON has no NaN or infinity; they become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json optional_number(const std::optional<double>& x) { return x ? number(*x) : json(nullptr); }

json model_summary(const ModelSpec& model) {
  json out = {{"kind", to_string(model.kind())}, {"d", model.dim()}};
  if (model.bernoulli_responses()) out["p"] = vector_json(model.p());
  return out;
}

}  // namespace

std::string code_version() { return URNSA_VERSION; }

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv(const Trajectory& t) {
  const Eigen::Index d = t.initial.dim();
  std::ostringstream out;
  std::vector<std::string> head = {"n"};
  for (const char* block : {"Ytilde_", "Ntilde_", "Stilde_", "Pi_"}) {
    for (Eigen::Index i = 1; i <= d; ++i) head.push_back(block + std::to_string(i));
  }
  head.push_back("w");
  for (std::size_t k = 0; k < head.size(); ++k) out << (k ? "," : "") << csv_field(head[k]);
  out << "\r\n";
  for (const Checkpoint& cp : t.checkpoints) {
    if (cp.n == 0) continue;
    out << cp.n;
    for (const Vector* v : {&cp.y_tilde, &cp.n_tilde, &cp.s_tilde, &cp.pi}) {
      for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double((*v)(i));
    }
    out << ',' << format_double(cp.w) << "\r\n";
  }
  return out.str();
}

json matrix_json(const Matrix& A) {
  json data = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) data.push_back(number(A(i, j)));
  }
  return {{"rows", A.rows()}, {"cols", A.cols()}, {"data", data}};
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

json complex_json(Complex z) { return {{"re", number(z.real())}, {"im", number(z.imag())}}; }

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw InputError("matrix data does not match its dimensions");
  }
  Matrix A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& x = data[static_cast<std::size_t>(i * cols + k)];
      A(i, k) = x.is_null() ? std::nan("") : x.get<double>();
    }
  }
  return A;
}

json assumptions_json(const AssumptionReport& report) {
  json flags = json::object();
  json details = json::array();
  for (const auto& e : report.entries) {
    flags[e.id] = to_string(e.status);
    details.push_back({{"id", e.id},
                       {"status", to_string(e.status)},
                       {"detail", e.detail},
                       {"margin", number(e.margin)}});
  }
  return {{"flags", flags}, {"details", details}};
}

json asymptotics_report(const AsymptoticsBundle& b) {
  json out = header("asymptotics");
  out["model"] = {{"kind", to_string(b.kind)}, {"d", b.v_star.size()}};
  out["extended"] = b.extended;
  out["H"] = matrix_json(b.H);
  json cs = json::array();
  for (const Matrix& C : b.C) cs.push_back(matrix_json(C));
  out["C"] = cs;
  out["v_star"] = vector_json(b.v_star);
  out["theta_star"] = vector_json(b.theta_star);
  json spec = json::array();
  for (const Complex& z : b.regime.spectrum) spec.push_back(complex_json(z));
  out["spectrum_H"] = spec;
  out["regime"] = to_string(b.regime.regime);
  out["lambda_max"] = complex_json(b.regime.lambda_max);
  out["Lambda"] = number(b.regime.Lambda);
  out["beta"] = optional_number(b.regime.beta);
  out["Gamma"] = matrix_json(b.Gamma);
  out["Dh"] = matrix_json(b.Dh);
  out["Sigma"] = b.Sigma ? matrix_json(*b.Sigma) : json(nullptr);
  out["sigma_omitted_reason"] = b.Sigma ? json(nullptr) : json(b.sigma_omitted_reason);
  out["quadrature_rel_error"] = optional_number(b.quadrature_rel_error);
  out["Gamma_H"] = b.Gamma_H ? matrix_json(*b.Gamma_H) : json(nullptr);
  out["assumptions"] = assumptions_json(b.assumptions);
  return out;
}

json asymptotics_error_report(const std::string& reason, const std::string& message,
                              const AssumptionReport* assumptions) {
  json out = header("asymptotics_error");
  out["reason"] = reason;
  out["message"] = message;
  out["assumptions"] = assumptions ? assumptions_json(*assumptions) : json(nullptr);
  return out;
}

json criterion_json(const CriterionResult& r) {
  json ms = json::array();
  for (const Measurement& m : r.measurements) {
    ms.push_back({{"name", m.name},
                  {"value", number(m.value)},
                  {"relation", m.relation},
                  {"tolerance", number(m.tolerance)},
                  {"upper", optional_number(m.upper)},
                  {"pass", m.pass}});
  }
  return {{"id", r.id},
          {"name", r.name},
          {"pass", r.pass},
          {"runtime_s", number(r.runtime_s)},
          {"runtime_limit_s", number(r.runtime_limit_s)},
          {"measurements", ms},
          {"notes", r.notes},
          {"error", r.error.empty() ? json(nullptr) : json(r.error)}};
}

json validation_report(const std::vector<CriterionResult>& criteria,
                       const std::vector<CriterionResult>& statistics, bool quick,
                       std::uint64_t seed, int workers) {
  json out = header("validation");
  out["quick"] = quick;
  out["seed"] = seed;
  out["workers"] = workers;
  bool pass = true;
  json cs = json::array();
  for (const auto& r : criteria) {
    pass = pass && r.pass;
    cs.push_back(criterion_json(r));
  }
  json ss = json::array();
  for (const auto& r : statistics) {
    pass = pass && r.pass;
    ss.push_back(criterion_json(r));
  }
  out["criteria"] = cs;
  out["statistics"] = ss;
  out["pass"] = pass;
  return out;
}

json oracle_report(const ExactLaw& law, const ModelSpec& model) {
  json out = header("oracle");
  out["model"] = model_summary(model);
  out["horizon"] = law.horizon;
  out["rational"] = law.rational;
  out["raw_paths"] = law.raw_paths;
  out["merged_outcomes"] = law.outcomes.size();
  out["total_mass"] = number(law.total_mass);
  out["mass_exact"] = law.mass_exact;
  json os = json::array();
  for (const ExactOutcome& o : law.outcomes) {
    os.push_back({{"probability", number(o.probability)},
                  {"exact_probability", o.exact_probability ? json(*o.exact_probability) : json(nullptr)},
                  {"Y", vector_json(o.Y)},
                  {"N", vector_json(o.N)},
                  {"S", vector_json(o.S)},
                  {"Pi", vector_json(o.Pi)},
                  {"paths", o.paths}});
  }
  out["outcomes"] = os;
  return out;
}

json run_manifest(const RunConfig& config, const std::string& command,
                  const std::vector<std::string>& files, const std::vector<Trajectory>& trajectories) {
  json out = header("manifest");
  out["command"] = command;
  out["seed"] = config.simulate.seed;
  out["model"] = to_json(config).at("model");
  out["config"] = to_json(config);
  out["files"] = files;
  json ts = json::array();
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    const Trajectory& t = trajectories[k];
    ts.push_back({{"file", k < files.size() ? json(files[k]) : json(nullptr)},
                  {"stream", t.stream},
                  {"status", to_string(t.status)},
                  {"steps_done", t.steps_done},
                  {"message", t.message}});
  }
  out["trajectories"] = ts;
  if (config.preset == "figure1") {
    out["plotting_recipe"] =
        "Plot columns Ytilde_1 and Ntilde_1 of the CSV against n (x axis, log scale "
        "optional) together with the horizontal line v*_1 = 0.375; both series settle "
        "on it. Example: python3 -c \"import pandas as pd, matplotlib.pyplot as plt; "
        "t = pd.read_csv('" +
        (files.empty() ? std::string("trajectory_0.csv") : files.front()) +
        "'); t.plot(x='n', y=['Ytilde_1', 'Ntilde_1']); plt.axhline(0.375); plt.show()\"";
  } else {
    out["plotting_recipe"] = nullptr;
  }
  return out;
}

// Schema -----------------------------------------------------------------

namespace {

enum class Kind { string, number, nullable_number, integer, boolean, array, object, matrix,
                  nullable_matrix, vector, complex, nullable_string, any };

struct Field {
  const char* key;
  Kind kind;
};

bool is_number_or_null(const json& j) { return j.is_number() || j.is_null(); }

bool matches(const json& j, Kind kind, std::string& why) {
  switch (kind) {
    case Kind::string: return j.is_string();
    case Kind::nullable_string: return j.is_string() || j.is_null();
    case Kind::number: return j.is_number();
    case Kind::nullable_number: return is_number_or_null(j);
    case Kind::integer: return j.is_number_integer();
    case Kind::boolean: return j.is_boolean();
    case Kind::array: return j.is_array();
    case Kind::object: return j.is_object();
    case Kind::any: return true;
    case Kind::nullable_matrix:
      if (j.is_null()) return true;
      [[fallthrough]];
    case Kind::matrix: {
      if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
        return false;
      }
      if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer() || !j["data"].is_array()) {
        return false;
      }
      const auto expect = j["rows"].get<std::int64_t>() * j["cols"].get<std::int64_t>();
      if (static_cast<std::int64_t>(j["data"].size()) != expect) {
        why = "data length differs from rows*cols";
        return false;
      }
      for (const auto& x : j["data"]) {
        if (!is_number_or_null(x)) return false;
      }
      return true;
    }
    case Kind::vector:
      if (!j.is_array()) return false;
      for (const auto& x : j) {
        if (!is_number_or_null(x)) return false;
      }
      return true;
    case Kind::complex:
      return j.is_object() && j.contains("re") && j.contains("im") && is_number_or_null(j["re"]) &&
             is_number_or_null(j["im"]);
  }
  return false;
}

void require(const json& obj, const std::string& where, const std::vector<Field>& fields,
             std::vector<std::string>& problems) {
  if (!obj.is_object()) {
    problems.push_back(where + " is not an object");
    return;
  }
  for (const Field& f : fields) {
    if (!obj.contains(f.key)) {
      problems.push_back(where + "." + f.key + " is missing");
      continue;
    }
    std::string why;
    if (!matches(obj[f.key], f.kind, why)) {
      problems.push_back(where + "." + f.key + " has the wrong shape" + (why.empty() ? "" : ": " + why));
    }
  }
}

void check_criteria(const json& list, const std::string& where, std::vector<std::string>& problems) {
  if (!list.is_array()) return;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string at = where + "[" + std::to_string(k) + "]";
    require(list[k], at,
            {{"id", Kind::integer}, {"name", Kind::string}, {"pass", Kind::boolean},
             {"runtime_s", Kind::nullable_number}, {"runtime_limit_s", Kind::nullable_number},
             {"measurements", Kind::array}, {"notes", Kind::array}, {"error", Kind::nullable_string}},
            problems);
    if (!list[k].is_object() || !list[k].contains("measurements") || !list[k]["measurements"].is_array()) {
      continue;
    }
    const json& ms = list[k]["measurements"];
    for (std::size_t m = 0; m < ms.size(); ++m) {
      const std::string mat = at + ".measurements[" + std::to_string(m) + "]";
      require(ms[m], mat,
              {{"name", Kind::string}, {"value", Kind::nullable_number}, {"relation", Kind::string},
               {"tolerance", Kind::nullable_number}, {"upper", Kind::nullable_number},
               {"pass", Kind::boolean}},
              problems);
      if (ms[m].is_object() && ms[m].contains("relation") && ms[m]["relation"].is_string()) {
        static const std::vector<std::string> relations = {"<=", ">=", "==", "in", "info"};
        const auto rel = ms[m]["relation"].get<std::string>();
        if (std::find(relations.begin(), relations.end(), rel) == relations.end()) {
          problems.push_back(mat + ".relation '" + rel + "' is unknown");
        }
      }
    }
  }
}

void check_assumptions(const json& a, const std::string& where, std::vector<std::string>& problems) {
  require(a, where, {{"flags", Kind::object}, {"details", Kind::array}}, problems);
  if (!a.is_object() || !a.contains("flags") || !a["flags"].is_object()) return;
  for (const auto& item : a["flags"].items()) {
    const json& v = item.value();
    if (!v.is_string() || (v != "holds" && v != "fails" && v != "not-checkable")) {
      problems.push_back(where + ".flags." + item.key() + " is not holds/fails/not-checkable");
    }
  }
}

}  // namespace

std::vector<std::string> schema_problems(const json& r) {
  std::vector<std::string> problems;
  require(r, "report", {{"report", Kind::string}, {"schema_version", Kind::integer}, {"version", Kind::string}},
          problems);
  if (!problems.empty()) return problems;
  if (r["schema_version"] != kSchemaVersion) problems.push_back("unsupported schema_version");
  const std::string type = r["report"];
  if (type == "asymptotics") {
    require(r, "asymptotics",
            {{"model", Kind::object}, {"extended", Kind::boolean}, {"H", Kind::matrix},
             {"C", Kind::array}, {"v_star", Kind::vector}, {"theta_star", Kind::vector},
             {"spectrum_H", Kind::array}, {"regime", Kind::string}, {"lambda_max", Kind::complex},
             {"Lambda", Kind::number}, {"beta", Kind::nullable_number}, {"Gamma", Kind::matrix},
             {"Dh", Kind::matrix}, {"Sigma", Kind::nullable_matrix},
             {"sigma_omitted_reason", Kind::nullable_string},
             {"quadrature_rel_error", Kind::nullable_number}, {"Gamma_H", Kind::nullable_matrix},
             {"assumptions", Kind::object}},
            problems);
    if (!problems.empty()) return problems;
    const std::string regime = r["regime"];
    if (regime != "a" && regime != "b" && regime != "c") problems.push_back("regime must be a, b or c");
    if (r["Sigma"].is_null() == r["sigma_omitted_reason"].is_null()) {
      problems.push_back("exactly one of Sigma and sigma_omitted_reason must be set");
    }
    std::string why;
    for (const auto& c : r["C"]) {
      if (!matches(c, Kind::matrix, why)) problems.push_back("C entries must be matrices");
    }
    for (const auto& z : r["spectrum_H"]) {
      if (!matches(z, Kind::complex, why)) problems.push_back("spectrum_H entries must be complex");
    }
    const auto dim = r["extended"].get<bool>() ? 3 : 2;
    const auto expect = static_cast<std::int64_t>(dim * r["v_star"].size());
    for (const char* key : {"Gamma", "Dh"}) {
      if (r[key]["rows"] != expect || r[key]["cols"] != expect) {
        problems.push_back(std::string(key) + " has the wrong dimension");
      }
    }
    if (static_cast<std::int64_t>(r["theta_star"].size()) != expect) {
      problems.push_back("theta_star has the wrong length");
    }
    check_assumptions(r["assumptions"], "asymptotics.assumptions", problems);
  } else if (type == "asymptotics_error") {
    require(r, "asymptotics_error", {{"reason", Kind::string}, {"message", Kind::string}}, problems);
    if (r.contains("assumptions") && !r["assumptions"].is_null()) {
      check_assumptions(r["assumptions"], "asymptotics_error.assumptions", problems);
    }
  } else if (type == "validation") {
    require(r, "validation",
            {{"quick", Kind::boolean}, {"seed", Kind::integer}, {"workers", Kind::integer},
             {"pass", Kind::boolean}, {"criteria", Kind::array}, {"statistics", Kind::array}},
            problems);
    if (r.contains("criteria")) check_criteria(r["criteria"], "validation.criteria", problems);
    if (r.contains("statistics")) check_criteria(r["statistics"], "validation.statistics", problems);
  } else if (type == "oracle") {
    require(r, "oracle",
            {{"model", Kind::object}, {"horizon", Kind::integer}, {"rational", Kind::boolean},
             {"raw_paths", Kind::integer}, {"merged_outcomes", Kind::integer},
             {"total_mass", Kind::number}, {"mass_exact", Kind::boolean}, {"outcomes", Kind::array}},
            problems);
    if (!problems.empty()) return problems;
    if (r["merged_outcomes"] != r["outcomes"].size()) {
      problems.push_back("merged_outcomes differs from the outcome count");
    }
    for (std::size_t k = 0; k < r["outcomes"].size(); ++k) {
      require(r["outcomes"][k], "oracle.outcomes[" + std::to_string(k) + "]",
              {{"probability", Kind::number}, {"exact_probability", Kind::nullable_string},
               {"Y", Kind::vector}, {"N", Kind::vector}, {"S", Kind::vector}, {"Pi", Kind::vector},
               {"paths", Kind::integer}},
              problems);
    }
  } else if (type == "manifest") {
    require(r, "manifest",
            {{"command", Kind::string}, {"seed", Kind::integer}, {"model", Kind::object},
             {"config", Kind::object}, {"files", Kind::array}, {"trajectories", Kind::array},
             {"plotting_recipe", Kind::nullable_string}},
            problems);
  } else {
    problems.push_back("unknown report type '" + type + "'");
  }
  return problems;
}

void prepare_output_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("cannot create output directory '" + dir.string() + "'");
  }
  const auto probe = dir / ".urnsa-write-probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "probe") || !out.flush()) {
      throw ConfigError("output directory '" + dir.string() + "' is not writable");
    }
  }
  std::filesystem::remove(probe, ec);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

}  // namespace urnsa
