#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "lgm/growth.hpp"

namespace lgm::cli {

enum ExitCode { kOk = 0, kUsage = 1, kConfigError = 2, kModelError = 3, kVerificationFailure = 4 };

/// Raised for invalid configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Built-in preset as a config document.
nlohmann::json preset_config(const std::string& id);

/// Applies "a.b.c=value"; value is read as JSON when it parses, as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Model spec described by the "model" section. Throws ConfigError.
GrowthModelSpec build_spec(const nlohmann::json& config);
GridSpec build_grid(const nlohmann::json& config);
std::vector<double> build_times(const nlohmann::json& config);

/// Rejects unknown keys anywhere in the document. Throws ConfigError.
void validate_config(const nlohmann::json& config);

/// Canonical hash of a config document.
std::string config_hash(const nlohmann::json& config);

/// Entry point; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lgm::cli
