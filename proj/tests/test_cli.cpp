#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "vpdisp/commands.hpp"
#include "vpdisp/config.hpp"
#include "vpdisp/csv_io.hpp"
#include "vpdisp/errors.hpp"

using namespace vpdisp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vpdisp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int exe(const std::string& args) {
  const std::string cmd = std::string(VPDISP_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* small_shell =
    "scenario = shell\n"
    "shell.count = 300\n"
    "t_end = 2\n"
    "output_cadence = 0.5\n"
    "R_grid = 1, 2.5\n"
    "q_list = 5/3, 2\n";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parse keys, comments and lists") {
    const auto map = ConfigMap::parse("# header\nscenario = shell  # trailing\n\nq_list = 5/3, 2\nseed=7\n");
    REQUIRE(map.entries().size() == 3);
    CHECK(map.find("scenario")->value == "shell");
    CHECK(map.find("q_list")->line == 4);
    const auto cfg = build_run_config(map);
    CHECK(cfg.scenario == Scenario::shell);
    CHECK(cfg.seed == 7);
    CHECK(cfg.shell.seed == 7);
    REQUIRE(cfg.diagnostics.q_list.size() == 2);
    CHECK(cfg.diagnostics.q_list[0] == 5.0 / 3.0);
    CHECK(parse_number(" -2e-3 ") == -2e-3);
    CHECK(parse_number_list("").empty());
    CHECK_THROWS_AS(parse_number("1/0"), DomainError);
    CHECK_THROWS_AS(parse_number("abc"), DomainError);
  }

  TEST_CASE("errors name the field and line") {
    try {
      build_run_config(ConfigMap::parse("scenario = shell\nshell.mas = 1\n"));
      FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "shell.mas");
      CHECK(e.line() == 2);
    }
    try {
      build_run_config(ConfigMap::parse("scenario = shell\ndt_safety = 2\n"));
      FAIL("bad value accepted");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "dt_safety");
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(ConfigMap::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigMap::parse("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(build_run_config(ConfigMap::parse("seed = 1\n")), ConfigError);
    CHECK_THROWS_AS(build_run_config(ConfigMap::parse("scenario = shell\nt_end = x\n")), ConfigError);
    CHECK_THROWS_AS(build_run_config(ConfigMap::parse("scenario = shell_plus_core\nshell.r_inner = 0.5\nshell.r_outer = 2\n")),
                    ConfigError);
  }

  TEST_CASE("scalar keys") {
    CHECK(is_scalar_key("shell.w_min"));
    CHECK(is_scalar_key("kurth.k"));
    CHECK_FALSE(is_scalar_key("R_grid"));
    CHECK_FALSE(is_scalar_key("scenario"));
    CHECK_FALSE(is_scalar_key("nonsense"));
  }

  TEST_CASE("shipped configs are valid") {
    for (const char* name : {"shell.cfg", "core.cfg", "shell_plus_core.cfg", "kurth.cfg"})
      CHECK_NOTHROW(build_run_config(ConfigMap::load(fs::path(VPDISP_CONFIG_DIR) / name)));
  }
}

TEST_SUITE("csv") {
  TEST_CASE("shortest round-trip numbers") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(5.0 / 3.0) == "1.6666666666666667");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  }

  TEST_CASE("header and round trip") {
    CHECK(diagnostics_header({1.0, 2.5}, {5.0 / 3.0, 2.0}) ==
          "t,E,E_kin,E_pot,M,var_x,dilation,conformal,R1,R2,R1_shell,conc_R1,conc_R2.5,lq_1.6666666666666667,lq_2");
    DiagnosticsRecord r;
    r.time = 0.5;
    r.energy_total = -0.1;
    r.mass = 1.0;
    r.variance = 0.6;
    r.inner_radius = 0.0;
    r.outer_radius = 1.25;
    r.concentration = {{1.0, 0.3}};
    r.lq_norms = {{2.0, 0.7}};
    std::stringstream s;
    write_diagnostics_csv(s, {r}, {1.0}, {2.0});
    CHECK(s.str().find('\r') == std::string::npos);
    const auto table = read_diagnostics_csv(s);
    REQUIRE(table.records.size() == 1);
    const auto& back = table.records[0];
    CHECK(back.time == 0.5);
    CHECK_FALSE(back.energy_kinetic.has_value());
    CHECK(back.concentration == r.concentration);
    CHECK(back.lq_norms == r.lq_norms);
    CHECK(table.R_grid == std::vector<double>{1.0});
  }

  TEST_CASE("malformed rows report their row number") {
    const std::string header = diagnostics_header({}, {}) + "\n";
    const auto row_of = [](const std::string& text) -> std::size_t {
      std::stringstream s(text);
      try {
        read_diagnostics_csv(s);
      } catch (const CsvParseError& e) {
        return e.row();
      }
      return 0;
    };
    CHECK(row_of(header + "0,1,,,1,1,,,0,1,\n1,1,,,1,x,,,0,1,\n") == 3);
    CHECK(row_of(header + "0,1,,,1,1,,,0,1\n") == 2);
    CHECK(row_of(header + "0,,,,1,1,,,0,1,\n") == 2);
    CHECK(row_of(header + "1,1,,,1,1,,,0,1,\n1,1,,,1,1,,,0,1,\n") == 3);
    CHECK(row_of("t,E\n") == 1);
    CHECK(row_of("") == 1);
  }
}

TEST_SUITE("commands") {
  TEST_CASE("run writes schema, manifest and snapshots") {
    const auto dir = scratch("run");
    auto map = ConfigMap::parse(small_shell);
    map.set("snapshot_times", "1");
    const auto res = cmd_run(build_run_config(map), dir);
    const std::string csv = slurp(dir / "diagnostics.csv");
    CHECK(csv.rfind(diagnostics_header({1.0, 2.5}, {5.0 / 3.0, 2.0}) + "\n", 0) == 0);
    CHECK(res.records.size() == 5);
    CHECK(fs::exists(dir / "snapshot_0.csv"));
    CHECK(slurp(dir / "snapshot_0.csv").rfind("r,w,ell,mass,group\n", 0) == 0);
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["seed"] == 1);
    CHECK(manifest["scenario"] == "shell");
    CHECK(manifest["config"]["shell.count"] == "300");
    CHECK(manifest["scenario_report"]["escape_condition"] == true);

    const auto again = scratch("run_again");
    cmd_run(build_run_config(map), again);
    CHECK(slurp(again / "diagnostics.csv") == csv);
    CHECK(slurp(again / "manifest.json") == slurp(dir / "manifest.json"));
  }

  TEST_CASE("t_end = 0 gives one data row") {
    const auto dir = scratch("t0");
    auto map = ConfigMap::parse(small_shell);
    map.set("t_end", "0");
    cmd_run(build_run_config(map), dir);
    const auto table = read_diagnostics_csv(dir / "diagnostics.csv");
    CHECK(table.records.size() == 1);
  }

  TEST_CASE("kurth trajectories") {
    KurthRequest req;
    req.t_end = 20.0;
    const auto stat = kurth_records(req);
    for (const auto& r : stat) {
      CHECK(r.variance == stat.front().variance);
      CHECK(r.lq_norms == stat.front().lq_norms);
      CHECK(r.concentration == stat.front().concentration);
      CHECK(r.energy_total == stat.front().energy_total);
    }
    req.k = 1.5;
    req.t_end = 1e4;
    req.cadence = 50.0;
    const auto fast = kurth_records(req);
    const double slope = std::log(fast.back().variance / fast[fast.size() / 2].variance) /
                         std::log(fast.back().time / fast[fast.size() / 2].time);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.01));

    const auto dir = scratch("kurth");
    req.t_end = 5.0;
    req.cadence = 1.0;
    cmd_kurth(req, dir);
    const std::string csv = slurp(dir / "diagnostics.csv");
    CHECK(csv.rfind("t,E,E_kin,E_pot,M,var_x,dilation,conformal,R1,R2,R1_shell,conc_R1,conc_R2,conc_R5,conc_R10,", 0) == 0);
    CHECK(read_diagnostics_csv(dir / "diagnostics.csv").records.size() == 6);
    req.cadence = 0.0;
    CHECK_THROWS_AS(kurth_records(req), DomainError);
  }

  TEST_CASE("classify writes a report") {
    const auto dir = scratch("classify");
    KurthRequest req;
    req.t_end = 200.0;
    req.cadence = 0.5;
    cmd_kurth(req, dir);
    const auto rep = cmd_classify({dir / "diagnostics.csv", std::nullopt, 0.0, std::nullopt}, dir);
    CHECK(rep.label == Regime::steady);
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j["label"] == "steady");
    CHECK(j["threshold_check"]["E"] == doctest::Approx(-0.6));
    CHECK(j["consistency"].size() == 7);
  }

  TEST_CASE("sweep summary") {
    const auto base = ConfigMap::parse("scenario = kurth\nt_end = 200\noutput_cadence = 0.5\n");
    const auto dir = scratch("sweep");
    const auto rows = cmd_sweep(base, "kurth.k", {0.0, 0.5, 1.0, 1.5}, dir, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].label == Regime::steady);
    CHECK(rows[1].label == Regime::periodic);
    CHECK(rows[2].label == Regime::strongly_dispersive);
    CHECK(rows[3].label == Regime::strongly_dispersive);
    const std::string summary = slurp(dir / "summary.csv");
    CHECK(summary.rfind("value,E,Q2_2M,label,exponent,M_inf,escape_condition\n0,-0.6,0,steady,", 0) == 0);
    CHECK(fs::exists(dir / "run_3" / "report.json"));

    const auto empty = scratch("sweep_empty");
    CHECK(cmd_sweep(base, "kurth.k", {}, empty).empty());
    CHECK(slurp(empty / "summary.csv") == "value,E,Q2_2M,label,exponent,M_inf,escape_condition\n");
    CHECK_THROWS_AS(cmd_sweep(base, "R_grid", {1.0}, empty), ConfigError);
  }

  TEST_CASE("shell sweep flips the escape condition at the threshold") {
    const auto base = ConfigMap::parse(
        "scenario = shell\nshell.count = 200\nt_end = 1\noutput_cadence = 0.5\nR_grid = 1\nq_list = 2\n");
    const auto dir = scratch("sweep_shell");
    const double threshold = std::sqrt(1.0 / (2.0 * std::numbers::pi));
    const auto rows = cmd_sweep(base, "shell.w_min", {threshold - 0.01, threshold + 0.01}, dir);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].escape_condition == false);
    CHECK(rows[1].escape_condition == true);
  }

  TEST_CASE("failed runs are recorded and the sweep continues") {
    const auto base = ConfigMap::parse(small_shell);
    const auto dir = scratch("sweep_fail");
    // r_outer below r_inner fails validation for the first value only
    const auto rows = cmd_sweep(base, "shell.r_outer", {0.5, 2.0}, dir);
    CHECK(rows[0].failed);
    CHECK_FALSE(rows[1].failed);
    CHECK(slurp(dir / "summary.csv").find("0.5,,,failed,,,\n") != std::string::npos);
  }
}

TEST_SUITE("executable") {
  TEST_CASE("exit codes") {
    const auto dir = scratch("exe");
    spit(dir / "ok.cfg", small_shell);
    spit(dir / "typo.cfg", std::string(small_shell) + "shell.wmin = 1\n");
    spit(dir / "stiff.cfg",
         "scenario = shell\nshell.count = 10\nshell.w_min = -1e30\nshell.w_max = -1e30\nshell.ell_min = 0.1\n"
         "shell.ell_max = 0.1\ndt_initial = 1e-14\nt_end = 1\n");
    spit(dir / "bad.csv", diagnostics_header({}, {}) + "\n0,1,,,1,oops,,,0,1,\n");

    CHECK(exe("run --config " + (dir / "ok.cfg").string() + " --out " + (dir / "a").string()) == 0);
    CHECK(exe("run --config " + (dir / "ok.cfg").string() + " --out " + (dir / "b").string() + " --threads 3") == 0);
    CHECK(slurp(dir / "a" / "diagnostics.csv") == slurp(dir / "b" / "diagnostics.csv"));
    CHECK(exe("run --config " + (dir / "ok.cfg").string() + " --out " + (dir / "c").string() + " --seed 9") == 0);
    CHECK(slurp(dir / "a" / "diagnostics.csv") != slurp(dir / "c" / "diagnostics.csv"));

    CHECK(exe("run --config " + (dir / "typo.cfg").string()) == 2);
    CHECK(exe("run --config " + (dir / "missing.cfg").string()) == 2);
    CHECK(exe("run --config " + (dir / "stiff.cfg").string() + " --out " + (dir / "s").string()) == 3);
    CHECK(exe("classify --csv " + (dir / "bad.csv").string()) == 4);
    CHECK(exe("classify --csv " + (dir / "a" / "diagnostics.csv").string()) == 0);
    CHECK(fs::exists(dir / "a" / "report.json"));
    CHECK(exe("kurth --k 0.5 --t-end 10 --out " + (dir / "k").string()) == 0);
    CHECK(exe("kurth --k 0.5 --cadence 0 --out " + (dir / "k0").string()) == 2);
    CHECK(exe("sweep --config " + (dir / "ok.cfg").string() + " --param R_grid --values 1 --out " +
              (dir / "sw").string()) == 2);
  }
}
