#pragma once

// Subcommands behind the vpdisp executable. Each writes into its own output
// directory and returns what it computed so callers (sweeps, tests) can reuse it.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vpdisp/classify.hpp"
#include "vpdisp/config.hpp"
#include "vpdisp/core_model.hpp"

namespace vpdisp {

/// Exit codes of the command-line driver.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_config = 2,
  exit_numerical = 3,
  exit_classification_input = 4,
};

struct RunResult {
  std::filesystem::path directory;
  std::vector<DiagnosticsRecord> records;
  double energy = 0.0;  ///< total energy at t0
  double mass = 0.0;
  double momentum = 0.0;  ///< |Q|; zero under spherical symmetry
  std::optional<bool> escape_condition;
};

/// Builds the scenario, integrates it and writes diagnostics.csv,
/// manifest.json and snapshot_<i>.csv into `out_dir`.
RunResult cmd_run(const RunConfig& config, const std::filesystem::path& out_dir);

struct KurthRequest {
  double k = 0.0;
  double t_end = 10.0;
  double cadence = 0.1;
  std::vector<double> q_list{5.0 / 3.0, 2.0, 3.0};
  std::vector<double> R_grid{1.0, 2.0, 5.0, 10.0};

  void validate() const;
};

/// Analytic (or ODE, for |k| < 1 and k <= -1) Kurth trajectory in the
/// diagnostics schema.
std::vector<DiagnosticsRecord> kurth_records(const KurthRequest& request);

RunResult cmd_kurth(const KurthRequest& request, const std::filesystem::path& out_dir);

struct ClassifyRequest {
  std::filesystem::path csv;
  std::optional<double> energy;    ///< defaults to E of the first row
  double momentum = 0.0;           ///< |Q|
  std::optional<double> mass;      ///< defaults to M of the first row
};

/// Reads the CSV, classifies it and writes report.json into `out_dir`.
ClassificationReport cmd_classify(const ClassifyRequest& request, const std::filesystem::path& out_dir);

std::string report_json(const ClassificationReport& report);

struct SweepRow {
  double value = 0.0;
  bool failed = false;
  std::string error;
  double energy = 0.0;
  double threshold = 0.0;
  Regime label = Regime::undetermined;
  std::optional<Estimate> exponent;
  std::optional<Estimate> m_infinity;
  std::optional<bool> escape_condition;
};

/// One run per value in out_dir/run_<i>, each classified, and summary.csv
/// with the rows in input order. Throws ConfigError if `parameter` is not a
/// scalar key.
std::vector<SweepRow> cmd_sweep(const ConfigMap& base, const std::string& parameter,
                                const std::vector<double>& values, const std::filesystem::path& out_dir,
                                unsigned threads = 1);

}  // namespace vpdisp
