#include "vpdisp/commands.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vpdisp/csv_io.hpp"
#include "vpdisp/dynamics.hpp"
#include "vpdisp/errors.hpp"
#include "vpdisp/kurth.hpp"
#include "vpdisp/parallel.hpp"
#include "vpdisp/scenarios.hpp"

namespace vpdisp {

using ojson = nlohmann::ordered_json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void prepare_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

ojson number_or_null(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson estimate_json(const std::optional<Estimate>& e) {
  if (!e) return nullptr;
  return ojson{{"value", number_or_null(e->value)}, {"band", number_or_null(e->band)}};
}

ojson list_json(const std::vector<double>& v) {
  ojson out = ojson::array();
  for (double x : v) out.push_back(x);
  return out;
}

ojson manifest_base(std::string_view command) {
  return ojson{{"program", "vpdisp"}, {"version", VPDISP_VERSION}, {"command", command}};
}

}  // namespace

RunResult cmd_run(const RunConfig& config, const std::filesystem::path& out_dir) {
  if (config.scenario == Scenario::kurth) {
    KurthRequest req;
    req.k = config.kurth_k;
    req.t_end = config.integrator.t_end;
    req.cadence = config.integrator.output_cadence;
    req.q_list = config.diagnostics.q_list;
    req.R_grid = config.diagnostics.R_grid;
    return cmd_kurth(req, out_dir);
  }

  RunResult result;
  result.directory = out_dir;
  ojson report;
  Ensemble initial;
  switch (config.scenario) {
    case Scenario::shell: {
      auto build = build_shell(config.shell);
      report["escape_threshold"] = build.escape_threshold;
      report["escape_margin_sq"] = build.escape_margin_sq;
      report["escape_margin"] = number_or_null(build.escape_margin());
      report["escape_condition"] = build.escape_condition;
      result.escape_condition = build.escape_condition;
      initial = std::move(build.ensemble);
      break;
    }
    case Scenario::core:
      initial = build_circular_core(config.core);
      break;
    case Scenario::shell_plus_core: {
      auto build = build_shell_plus_core(config.core, config.shell);
      report["escape_threshold"] = build.escape_threshold;
      report["energy_total"] = build.energy_total;
      report["energy_core"] = build.energy_core;
      report["shell_mass_bound"] = build.shell_mass_bound;
      report["inf_w_sq"] = build.inf_w_sq;
      report["sup_p_sq"] = build.sup_p_sq;
      report["negative_energy_window"] = build.negative_energy_window;
      report["mass_below_bound"] = build.mass_below_bound;
      result.escape_condition = config.shell.w_min > build.escape_threshold;
      report["escape_condition"] = *result.escape_condition;
      initial = std::move(build.ensemble);
      break;
    }
    case Scenario::kurth:
      break;
  }

  RunOptions opts;
  opts.diagnostics = config.diagnostics;
  opts.snapshot_times = config.snapshot_times;
  opts.threads = config.threads;
  prepare_directory(out_dir);
  TrajectorySink sink = run(std::move(initial), config.integrator, opts);

  write_diagnostics_csv(out_dir / "diagnostics.csv", sink.records, config.diagnostics.R_grid,
                        config.diagnostics.q_list);
  ojson snapshots = ojson::array();
  for (std::size_t i = 0; i < sink.snapshots.size(); ++i) {
    const std::string name = "snapshot_" + std::to_string(i) + ".csv";
    write_snapshot_csv(out_dir / name, sink.snapshots[i]);
    snapshots.push_back(ojson{{"time", sink.snapshots[i].time}, {"file", name}});
  }

  ojson manifest = manifest_base("run");
  manifest["scenario"] = scenario_name(config.scenario);
  manifest["seed"] = config.seed;
  ojson echo = ojson::object();
  for (const auto& e : config.source.entries()) echo[e.key] = e.value;
  manifest["config"] = std::move(echo);
  manifest["scenario_report"] = report.is_null() ? ojson::object() : report;
  manifest["records"] = sink.records.size();
  manifest["snapshots"] = std::move(snapshots);
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

  result.records = std::move(sink.records);
  result.energy = result.records.front().energy_total;
  result.mass = result.records.front().mass;
  return result;
}

void KurthRequest::validate() const {
  if (!std::isfinite(k)) throw DomainError("k must be finite");
  if (!(cadence > 0.0)) throw DomainError("cadence must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be finite and non-negative");
  for (double q : q_list)
    if (!(q >= 1.0)) throw DomainError("q must be >= 1");
  for (double R : R_grid)
    if (!(R > 0.0)) throw DomainError("R must be positive");
}

std::vector<DiagnosticsRecord> kurth_records(const KurthRequest& request) {
  request.validate();
  std::vector<KurthState> states;
  if (request.k >= 1.0) {
    const auto n = static_cast<long>(std::floor(request.t_end / request.cadence + 1e-9));
    for (long i = 0; i <= n; ++i) states.push_back(kurth_state(request.k, static_cast<double>(i) * request.cadence));
  } else {
    states = integrate_phi(request.k, request.t_end, request.cadence);
  }
  std::vector<DiagnosticsRecord> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(kurth_diagnostics(s, request.q_list, request.R_grid));
  return out;
}

RunResult cmd_kurth(const KurthRequest& request, const std::filesystem::path& out_dir) {
  RunResult result;
  result.directory = out_dir;
  try {
    result.records = kurth_records(request);
  } catch (const SingularityError& err) {
    throw NumericalFailure(err.what(), 0.0);
  }
  prepare_directory(out_dir);
  write_diagnostics_csv(out_dir / "diagnostics.csv", result.records, request.R_grid, request.q_list);

  ojson manifest = manifest_base("kurth");
  manifest["scenario"] = "kurth";
  manifest["k"] = request.k;
  manifest["t_end"] = request.t_end;
  manifest["cadence"] = request.cadence;
  manifest["q_list"] = list_json(request.q_list);
  manifest["R_grid"] = list_json(request.R_grid);
  manifest["regime"] = regime_name(classify_k(request.k));
  manifest["energy"] = kurth_energy(request.k);
  if (const double a = std::abs(request.k); a > 0.0 && a < 1.0) manifest["period"] = kurth_period(request.k);
  manifest["records"] = result.records.size();
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

  result.energy = kurth_energy(request.k);
  result.mass = 1.0;
  return result;
}

std::string report_json(const ClassificationReport& rep) {
  ojson j;
  j["label"] = regime_name(rep.label);
  j["statistically_dispersive"] = rep.statistically_dispersive;
  j["growth_exponent"] = estimate_json(rep.growth_exponent);
  j["m_infinity"] = estimate_json(rep.m_infinity);

  ojson conc;
  conc["verdict"] = verdict_name(rep.concentration.verdict);
  ojson radii = ojson::array();
  for (std::size_t i = 0; i < rep.concentration.radii.size(); ++i) {
    radii.push_back(ojson{{"R", rep.concentration.radii[i]},
                          {"mass", number_or_null(rep.concentration.mass_at_radius[i].value)},
                          {"band", number_or_null(rep.concentration.mass_at_radius[i].band)},
                          {"converged", static_cast<bool>(rep.concentration.converged[i])}});
  }
  conc["radii"] = std::move(radii);
  j["concentration"] = std::move(conc);

  ojson strong = ojson::array();
  for (const auto& s : rep.strong)
    strong.push_back(ojson{{"q", s.q},
                           {"dispersive", s.dispersive},
                           {"decreasing", s.decreasing},
                           {"final_ratio", number_or_null(s.final_ratio)},
                           {"decay_exponent", estimate_json(s.decay_exponent)}});
  j["strong_dispersion"] = std::move(strong);

  if (rep.virial) {
    ojson v;
    v["virialized"] = rep.virial->virialized;
    v["threshold"] = rep.virial->threshold;
    v["final"] = rep.virial->metric.values.empty() ? ojson(nullptr) : number_or_null(rep.virial->metric.values.back());
    ojson trace = ojson::array();
    for (std::size_t i = 0; i < rep.virial->metric.size(); ++i)
      trace.push_back(ojson::array({rep.virial->metric.times[i], number_or_null(rep.virial->metric.values[i])}));
    v["trace"] = std::move(trace);
    j["virialization"] = std::move(v);
  } else {
    j["virialization"] = nullptr;
  }

  j["periodicity"] = ojson{{"periodic", rep.periodicity.periodic},
                           {"period", rep.periodicity.period},
                           {"second_period", rep.periodicity.second_period}};
  j["flat"] = rep.flat;
  j["potential_energy_vanishes"] =
      rep.potential_energy_vanishes ? ojson(*rep.potential_energy_vanishes) : ojson(nullptr);
  j["interpolation_ratio"] = rep.interpolation_ratio ? number_or_null(*rep.interpolation_ratio) : ojson(nullptr);
  j["threshold_check"] = ojson{{"E", rep.threshold.energy},
                               {"Q2_2M", rep.threshold.threshold},
                               {"E_rest", rep.threshold.rest_frame_energy}};
  ojson checks = ojson::array();
  for (const auto& c : rep.consistency)
    checks.push_back(ojson{{"id", c.id}, {"statement", c.statement}, {"outcome", outcome_name(c.outcome)}});
  j["consistency"] = std::move(checks);
  return j.dump(2) + "\n";
}

ClassificationReport cmd_classify(const ClassifyRequest& request, const std::filesystem::path& out_dir) {
  const DiagnosticsTable table = read_diagnostics_csv(request.csv);
  if (table.records.empty() && (!request.energy || !request.mass))
    throw CsvParseError("no data rows; pass E and M explicitly", 1);
  const double energy = request.energy ? *request.energy : table.records.front().energy_total;
  const double mass = request.mass ? *request.mass : table.records.front().mass;
  if (!(mass > 0.0)) throw DomainError("M must be positive");
  if (!std::isfinite(energy) || !std::isfinite(request.momentum) || request.momentum < 0.0)
    throw DomainError("E must be finite and |Q| finite and non-negative");
  ClassificationReport rep = classify(table.records, energy, request.momentum, mass);
  prepare_directory(out_dir);
  write_text(out_dir / "report.json", report_json(rep));
  return rep;
}

std::vector<SweepRow> cmd_sweep(const ConfigMap& base, const std::string& parameter,
                                const std::vector<double>& values, const std::filesystem::path& out_dir,
                                unsigned threads) {
  if (!is_scalar_key(parameter))
    throw ConfigError("`" + parameter + "` is not a scalar configuration key", parameter);
  // fail on a bad base config before any run starts
  build_run_config(base);
  prepare_directory(out_dir);

  std::vector<SweepRow> rows(values.size());
  parallel_for(
      values.size(), threads,
      [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.value = values[i];
        try {
          ConfigMap map = base;
          map.set(parameter, format_number(values[i]));
          RunConfig cfg = build_run_config(map);
          cfg.threads = 1;
          cfg.diagnostics.threads = 1;
          const RunResult res = cmd_run(cfg, out_dir / ("run_" + std::to_string(i)));
          const ClassificationReport rep = classify(res.records, res.energy, res.momentum, res.mass);
          write_text(res.directory / "report.json", report_json(rep));
          row.energy = res.energy;
          row.threshold = rep.threshold.threshold;
          row.label = rep.label;
          row.exponent = rep.growth_exponent;
          row.m_infinity = rep.m_infinity;
          row.escape_condition = res.escape_condition;
        } catch (const std::exception& err) {
          row.failed = true;
          row.error = err.what();
        }
      },
      1);

  std::ostringstream csv;
  csv << "value,E,Q2_2M,label,exponent,M_inf,escape_condition\n";
  for (const auto& row : rows) {
    csv << format_number(row.value) << ',';
    if (row.failed) {
      csv << ",,failed,,,\n";
      continue;
    }
    csv << format_number(row.energy) << ',' << format_number(row.threshold) << ',' << regime_name(row.label) << ','
        << (row.exponent ? format_number(row.exponent->value) : "") << ','
        << (row.m_infinity ? format_number(row.m_infinity->value) : "") << ','
        << (row.escape_condition ? (*row.escape_condition ? "true" : "false") : "") << '\n';
  }
  write_text(out_dir / "summary.csv", csv.str());
  return rows;
}

}  // namespace vpdisp
