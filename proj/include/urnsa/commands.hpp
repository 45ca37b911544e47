#pragma once

// The four CLI commands, callable without a process boundary.

#include "urnsa/acceptance.hpp"
#include "urnsa/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace urnsa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation failure, or a model the report rejects
inline constexpr int kExitConfig = 2;   // schema, input or output-directory problem

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::string> out;
  bool quick = false;
  std::optional<int> workers;
  std::vector<int> criteria;  // validate only; empty → from the config
};

/// Preset (figure1 when none given), then the config file on top, then the
/// command-line overrides.
RunConfig resolve_config(const CommandOptions& options);

/// Runs the statistics named in validate.statistics on an ensemble drawn
/// from the simulate section.
std::vector<CriterionResult> run_statistics(const RunConfig& config);

int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_asymptotics(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_validate(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_oracle(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Dispatches by command name; unknown names are config errors.
int run_command(const std::string& command, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace urnsa
