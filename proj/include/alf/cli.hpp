#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace alf {

enum class Verb { verify, scaling, asymptotics, curvature, volume, calibrate };

Verb parse_verb(const std::string& name);
std::string verb_name(Verb verb);

struct Command {
  Verb verb = Verb::verify;
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;  // "dot.path=value", value parsed as JSON when possible
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int threshold_failure = 1;
inline constexpr int config_error = 2;
inline constexpr int domain_error = 3;
}  // namespace exit_code

/// Applies one "a.b.c=value" override in place; throws ConfigError.
void apply_override(nlohmann::json& doc, const std::string& assignment);

struct VerbOutput {
  nlohmann::json results;  // always carries a boolean "pass"
  // (file name, contents) pairs written to the output directory.
  std::vector<std::pair<std::string, std::string>> files;
};

/// Runs one verb on an already-loaded config document. Pure: no I/O.
VerbOutput run_verb(Verb verb, const nlohmann::json& config_doc, int threads = 1);

/// Loads the config, applies overrides and the seed, runs the verb, writes
/// the CSV files and summary.json, and returns the exit status.
int run(const Command& cmd);

}  // namespace alf
