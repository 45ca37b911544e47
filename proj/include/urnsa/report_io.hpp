#pragma once

// Serialization: trajectory CSV, JSON reports and manifests, and the
// structural schema every emitted report must satisfy.

#include "urnsa/acceptance.hpp"
#include "urnsa/asymptotics.hpp"
#include "urnsa/config.hpp"
#include "urnsa/oracle.hpp"
#include "urnsa/urn.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace urnsa {

/// Field quoted per RFC 4180 when it holds a comma, quote or line break.
std::string csv_field(const std::string& text);
/// %.17g, enough to round-trip a double.
std::string format_double(double x);

/// Header n, Ytilde_1..d, Ntilde_1..d, Stilde_1..d, Pi_1..d, w; one row per
/// checkpoint after the initial one (header only for horizon 0). CRLF line ends.
std::string trajectory_csv(const Trajectory& trajectory);

nlohmann::json matrix_json(const Matrix& A);  // {rows, cols, data (row-major)}
nlohmann::json vector_json(const Vector& v);
nlohmann::json complex_json(Complex z);       // {re, im}
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json assumptions_json(const AssumptionReport& report);

nlohmann::json asymptotics_report(const AsymptoticsBundle& bundle);
/// Report for a model whose objects cannot be computed; `reason` is a
/// machine-readable code such as "A3_fails".
nlohmann::json asymptotics_error_report(const std::string& reason, const std::string& message,
                                        const AssumptionReport* assumptions);

nlohmann::json criterion_json(const CriterionResult& result);
nlohmann::json validation_report(const std::vector<CriterionResult>& criteria,
                                 const std::vector<CriterionResult>& statistics, bool quick,
                                 std::uint64_t seed, int workers);

nlohmann::json oracle_report(const ExactLaw& law, const ModelSpec& model);

/// Run manifest: seed, model, code version, produced files and, for the
/// figure1 preset, a plotting recipe.
nlohmann::json run_manifest(const RunConfig& config, const std::string& command,
                            const std::vector<std::string>& files,
                            const std::vector<Trajectory>& trajectories);

std::string code_version();

/// Problems found when checking a report against its schema (empty when it
/// conforms). The report type is read from its "report" field.
std::vector<std::string> schema_problems(const nlohmann::json& report);

/// Creates the directory when missing and probes it for writing; throws
/// ConfigError when that fails.
void prepare_output_directory(const std::filesystem::path& dir);

/// Writes the file in one go; throws ConfigError on failure.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace urnsa
