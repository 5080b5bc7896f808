// vpdisp: run, kurth, classify and sweep subcommands.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vpdisp/commands.hpp"
#include "vpdisp/config.hpp"
#include "vpdisp/csv_io.hpp"
#include "vpdisp/errors.hpp"
#include "vpdisp/kurth.hpp"

using namespace vpdisp;

namespace {

ConfigMap load_with_overrides(const std::string& path, const std::optional<std::uint64_t>& seed,
                              const std::optional<unsigned>& threads) {
  ConfigMap map = ConfigMap::load(path);
  if (seed) map.set("seed", std::to_string(*seed));
  if (threads) map.set("threads", std::to_string(*threads));
  return map;
}

std::vector<double> list_or_config_error(const std::string& text, const std::string& flag) {
  try {
    return parse_number_list(text);
  } catch (const DomainError& err) {
    throw ConfigError(flag + ": " + err.what(), flag);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherically symmetric Vlasov-Poisson shell simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", VPDISP_VERSION);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  auto* run_cmd = app.add_subcommand("run", "Integrate a configured scenario");
  run_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run_cmd->add_option("--seed", seed, "Seed (overrides config)");
  run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  KurthRequest kurth;
  std::string kurth_q = "5/3,2,3";
  std::string kurth_R = "1,2,5,10";
  std::string kurth_out = "out";
  auto* kurth_cmd = app.add_subcommand("kurth", "Write the analytic Kurth trajectory");
  kurth_cmd->add_option("--k", kurth.k, "Initial velocity phi'(0)")->required();
  kurth_cmd->add_option("--t-end", kurth.t_end, "Final time")->capture_default_str();
  kurth_cmd->add_option("--cadence", kurth.cadence, "Output cadence")->capture_default_str();
  kurth_cmd->add_option("--q", kurth_q, "Comma-separated L^q exponents")->capture_default_str();
  kurth_cmd->add_option("--R", kurth_R, "Comma-separated concentration radii")->capture_default_str();
  kurth_cmd->add_option("--out", kurth_out, "Output directory")->capture_default_str();

  std::string csv_path;
  std::optional<double> energy;
  std::optional<double> mass;
  double momentum = 0.0;
  std::string classify_out;
  auto* classify_cmd = app.add_subcommand("classify", "Classify a diagnostics CSV");
  classify_cmd->add_option("--csv", csv_path, "diagnostics.csv")->required();
  classify_cmd->add_option("--E", energy, "Total energy (default: first row)");
  classify_cmd->add_option("--Q", momentum, "|Q|, total momentum modulus")->capture_default_str();
  classify_cmd->add_option("--M", mass, "Total mass (default: first row)");
  classify_cmd->add_option("--out", classify_out, "Directory for report.json (default: next to the CSV)");

  std::string sweep_param;
  std::string sweep_values;
  std::string sweep_out = "sweep";
  auto* sweep_cmd = app.add_subcommand("sweep", "Run and classify one config per parameter value");
  sweep_cmd->add_option("--config", config_path, "Base config file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--param", sweep_param, "Scalar key to vary")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep_cmd->add_option("--out", sweep_out, "Output directory")->capture_default_str();
  sweep_cmd->add_option("--seed", seed, "Seed (overrides config)");
  sweep_cmd->add_option("--threads", threads, "Concurrent runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*run_cmd) {
      const RunConfig cfg = build_run_config(load_with_overrides(config_path, seed, threads));
      const auto res = cmd_run(cfg, out_dir.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_dir));
      std::cout << "wrote " << res.records.size() << " records to " << (res.directory / "diagnostics.csv").string()
                << '\n';
    } else if (*kurth_cmd) {
      kurth.q_list = list_or_config_error(kurth_q, "--q");
      kurth.R_grid = list_or_config_error(kurth_R, "--R");
      try {
        kurth.validate();
      } catch (const DomainError& err) {
        throw ConfigError(err.what());
      }
      const auto res = cmd_kurth(kurth, kurth_out);
      std::cout << "k = " << format_number(kurth.k) << " (" << regime_name(classify_k(kurth.k)) << "), "
                << res.records.size() << " records\n";
    } else if (*classify_cmd) {
      ClassifyRequest req{csv_path, energy, momentum, mass};
      const std::filesystem::path dir =
          classify_out.empty() ? std::filesystem::path(csv_path).parent_path() : std::filesystem::path(classify_out);
      const auto rep = cmd_classify(req, dir.empty() ? std::filesystem::path(".") : dir);
      std::cout << regime_name(rep.label) << '\n';
    } else if (*sweep_cmd) {
      const ConfigMap base = load_with_overrides(config_path, seed, std::nullopt);
      const auto values = list_or_config_error(sweep_values, "--values");
      const auto rows = cmd_sweep(base, sweep_param, values, sweep_out, threads.value_or(1));
      for (const auto& row : rows)
        std::cout << sweep_param << " = " << format_number(row.value) << ": "
                  << (row.failed ? "failed (" + row.error + ")" : std::string(regime_name(row.label))) << '\n';
    }
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what();
    if (!err.field().empty()) std::cerr << " [" << err.field() << "]";
    std::cerr << '\n';
    return exit_config;
  } catch (const NumericalFailure& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return exit_numerical;
  } catch (const CsvParseError& err) {
    std::cerr << "classification input error: " << err.what() << '\n';
    return exit_classification_input;
  } catch (const DomainError& err) {
    std::cerr << (*classify_cmd ? "classification input error: " : "error: ") << err.what() << '\n';
    return *classify_cmd ? exit_classification_input : exit_failure;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return exit_failure;
  }
  return exit_ok;
}
