#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "vpdisp/dynamics.hpp"
#include "vpdisp/errors.hpp"
#include "vpdisp/scenarios.hpp"

using namespace vpdisp;
using testing_support::make_ensemble;

namespace {

constexpr double pi = std::numbers::pi;

double hamiltonian(const Ensemble& e) { return kinetic_energy(e) - interaction_energy(e); }

}  // namespace

TEST_CASE("acceleration examples") {
  CHECK(acceleration(make_ensemble({1.5}, {2.0}))[0] == 0.0);
  const auto two = make_ensemble({0.5, 3.0}, {2.0, 1.0});
  CHECK(acceleration(two)[1] == doctest::Approx(-2.0 / (4.0 * pi * 9.0)).epsilon(1e-15));
  const double ell = std::sqrt(3.0 * 2.0 / (4.0 * pi));
  const auto circ = make_ensemble({0.5, 3.0}, {2.0, 1.0}, {0.0, 0.0}, {0.0, ell});
  CHECK(std::abs(acceleration(circ)[1]) < 1e-15);
  CHECK_THROWS_AS(acceleration(make_ensemble({0.0}, {1.0})), SingularityError);
}

TEST_CASE("free particle drifts exactly") {
  auto e = make_ensemble({1.0}, {1.0}, {0.25});
  IntegratorConfig cfg;
  for (int n = 0; n < 8; ++n) e = step(e, 0.5, cfg);
  CHECK(e.r[0] == 2.0);
  CHECK(e.w[0] == 0.25);
  CHECK(e.time == 4.0);
}

TEST_CASE("circular orbit keeps its radius to second order") {
  const double ell = std::sqrt(2.0 * 1.0 / (4.0 * pi));
  const auto e0 = make_ensemble({0.1, 2.0}, {1.0, 1e-3}, {0.0, 0.0}, {0.0, ell});
  double prev = 0.0;
  for (double dt : {0.4, 0.2, 0.1}) {
    const auto e = step(e0, dt);
    const double dev = std::abs(e.r[1] - 2.0);
    CHECK(dev < dt * dt);
    if (prev > 0.0) CHECK(dev < 0.3 * prev);
    prev = dev;
  }
}

TEST_CASE("two-shell bound system conserves energy") {
  // inner shell at rest (no force on it), outer shell on a mildly eccentric orbit
  const double ell = 0.95 * std::sqrt(2.0 * 1.0 / (4.0 * pi));
  Ensemble e = make_ensemble({1.0, 2.0}, {1.0, 0.5}, {0.0, 0.0}, {0.0, ell});
  const double E0 = hamiltonian(e);
  Leapfrog lf(e, IntegratorConfig{});
  double worst = 0.0;
  for (int n = 0; n < 10000; ++n) {
    lf.advance(0.01);
    worst = std::max(worst, std::abs(hamiltonian(lf.state()) - E0) / std::abs(E0));
  }
  CHECK(lf.state().r.minCoeff() > 0.9);
  CHECK(worst <= 1e-6);
}

TEST_CASE("one step forward and back is the identity") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ur(1.0, 3.0), uw(-0.3, 0.3), ul(0.2, 0.6), um(0.1, 1.0);
  std::vector<ShellParticle> ps;
  for (int i = 0; i < 200; ++i) ps.push_back({ur(rng), uw(rng), ul(rng), um(rng), Group::none});
  const Ensemble e0(ps);
  Ensemble e = step(e0, 0.01);
  e.w = -e.w;
  e = step(e, 0.01);
  e.w = -e.w;
  CHECK((e.r - e0.r).abs().maxCoeff() / e0.r.abs().maxCoeff() < 1e-12);
  CHECK((e.w - e0.w).abs().maxCoeff() / e0.w.abs().maxCoeff() < 1e-12);
}

TEST_CASE("radial orbit is reflected at the center") {
  const auto e = step(make_ensemble({0.1}, {1.0}, {-1.0}), 0.3);
  CHECK(e.r[0] == doctest::Approx(0.2));
  CHECK(e.w[0] == 1.0);
}

TEST_CASE("crossing the center with angular momentum rejects and halves") {
  // inward fast enough to cross r = 0 in one full step, slow enough after halving
  const auto e0 = make_ensemble({1.0}, {1.0}, {-1.5}, {0.1});
  Leapfrog lf(e0, IntegratorConfig{});
  lf.advance(1.0);
  CHECK(lf.rejected_steps() > 0);
  CHECK(lf.state().r[0] > 0.0);
  CHECK(lf.state().time == doctest::Approx(1.0));

  IntegratorConfig tight;
  tight.dt_initial = 1e-14;  // dt_min far above what the crossing needs
  Leapfrog stiff(make_ensemble({1.0}, {1.0}, {-1e30}, {0.1}), tight);
  CHECK_THROWS_AS(stiff.advance(1.0), StiffnessError);
}

TEST_CASE("adaptive dt") {
  IntegratorConfig cfg;
  cfg.output_cadence = 0.5;
  CHECK(adaptive_dt(make_ensemble({1.0}, {1.0}), cfg) == 0.5);

  const auto e = make_ensemble({1.0, 2.0}, {1.0, 1.0}, {0.3, 0.0});
  const double full = adaptive_dt(e, cfg);
  cfg.dt_safety *= 0.5;
  CHECK(adaptive_dt(e, cfg) == doctest::Approx(0.5 * full).epsilon(1e-14));

  const auto fast = make_ensemble({0.1, 2.0}, {1.0, 1.0}, {5.0, 0.1});
  CHECK(adaptive_dt(fast, cfg) == doctest::Approx(cfg.dt_safety * 0.1 / 5.0).epsilon(1e-12));
}

TEST_CASE("integrator config validation") {
  IntegratorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dt_safety = 1.5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.output_cadence = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.t_end = -1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("run records and conservation") {
  ShellSpec spec;
  spec.count = 500;
  spec.ell_max = 0.2;
  const auto shell = build_shell(spec).ensemble;

  IntegratorConfig cfg;
  cfg.t_end = 0.0;
  CHECK(run(shell, cfg).records.size() == 1);

  cfg.t_end = 5.0;
  cfg.output_cadence = 0.5;
  RunOptions opts;
  opts.snapshot_times = {2.0, 5.0};
  opts.diagnostics.R_grid = {1.0};
  const auto sink = run(shell, cfg, opts);
  REQUIRE(sink.records.size() == 11);
  for (std::size_t n = 0; n < sink.records.size(); ++n) CHECK(sink.records[n].time == 0.5 * static_cast<double>(n));
  REQUIRE(sink.snapshots.size() == 2);
  const auto& last = sink.snapshots.back();
  CHECK((last.ell == shell.ell).all());
  CHECK(last.total_mass() == shell.total_mass());
  CHECK(sink.records.back().mass == sink.records.front().mass);
  CHECK(sink.records.back().inner_radius_shell.has_value());
  const double E0 = sink.records.front().energy_total;
  for (const auto& rec : sink.records) CHECK(std::abs(rec.energy_total - E0) <= 1e-3 * std::abs(E0));
}

TEST_CASE("thread count does not change the trajectory") {
  CoreSpec core;
  core.count = 3000;
  ShellSpec shell;
  shell.count = 3000;
  shell.mass = 0.1;
  shell.r_inner = 2.0;
  shell.r_outer = 2.5;
  shell.w_min = 0.35;
  shell.w_max = 0.6;
  const auto e = build_shell_plus_core(core, shell).ensemble;
  IntegratorConfig cfg;
  cfg.t_end = 2.0;
  cfg.output_cadence = 1.0;
  RunOptions one, many;
  many.threads = 4;
  many.diagnostics.threads = 4;
  const auto a = run(e, cfg, one);
  const auto b = run(e, cfg, many);
  REQUIRE(a.records.size() == b.records.size());
  CHECK(a.records.back().energy_total == b.records.back().energy_total);
  CHECK(a.records.back().variance == b.records.back().variance);
  CHECK(a.records.back().concentration == b.records.back().concentration);
}

TEST_CASE("failures carry the simulation time") {
  IntegratorConfig cfg;
  cfg.dt_initial = 1e-14;
  cfg.t_end = 1.0;
  cfg.output_cadence = 1.0;
  try {
    run(make_ensemble({1.0}, {1.0}, {-1e30}, {0.1}), cfg);
    FAIL("expected a numerical failure");
  } catch (const NumericalFailure& err) {
    CHECK(err.time() == 0.0);
  }
}
