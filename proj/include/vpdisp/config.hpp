#pragma once

// Flat `key = value` run configuration with `#` comments. Unknown keys are
// errors; every value is validated before any computation starts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vpdisp/core_model.hpp"
#include "vpdisp/dynamics.hpp"
#include "vpdisp/scenarios.hpp"

namespace vpdisp {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string field = {}, int line = 0);
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Ordered entries as they appear in the file; a repeated key is an error.
class ConfigMap {
 public:
  static ConfigMap parse(std::string_view text);
  static ConfigMap load(const std::filesystem::path& path);

  const std::vector<ConfigEntry>& entries() const noexcept { return entries_; }
  const ConfigEntry* find(std::string_view key) const;
  /// Replaces the value of `key` (appending it when absent).
  void set(const std::string& key, const std::string& value);

 private:
  std::vector<ConfigEntry> entries_;
};

enum class Scenario { shell, core, shell_plus_core, kurth };

std::string_view scenario_name(Scenario s);

struct RunConfig {
  Scenario scenario = Scenario::shell;
  ShellSpec shell;
  CoreSpec core;
  double kurth_k = 0.0;
  IntegratorConfig integrator;
  DiagnosticsConfig diagnostics;
  std::vector<double> snapshot_times;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  unsigned threads = 1;
  ConfigMap source;
};

/// Builds and validates a RunConfig; throws ConfigError naming the field and line.
RunConfig build_run_config(const ConfigMap& map);

/// Keys addressable by a sweep (scalar-valued).
bool is_scalar_key(std::string_view key);

/// Parses "1.5", "5/3", "-2e-3" as a double.
double parse_number(std::string_view text);

/// Comma-separated list of parse_number values (empty string gives an empty list).
std::vector<double> parse_number_list(std::string_view text);

}  // namespace vpdisp
