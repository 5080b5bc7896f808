#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "vpdisp/dynamics.hpp"
#include "vpdisp/errors.hpp"
#include "vpdisp/scenarios.hpp"

using namespace vpdisp;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("counter-based variates") {
  CHECK(uniform01(1, 2, 3) == uniform01(1, 2, 3));
  CHECK(uniform01(1, 2, 3) != uniform01(2, 2, 3));
  CHECK(uniform01(1, 2, 3) != uniform01(1, 3, 3));
  double mean = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = uniform01(7, 1, i);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("escaping shell report") {
  ShellSpec spec;
  spec.count = 1000;
  const auto b = build_shell(spec);
  CHECK(b.escape_threshold == doctest::Approx(0.3989).epsilon(1e-4));
  CHECK(b.escape_condition);
  CHECK(b.escape_margin() == doctest::Approx(0.3014).epsilon(1e-3));

  spec.w_min = 0.0;
  const auto still = build_shell(spec);
  CHECK_FALSE(still.escape_condition);
  CHECK(still.escape_margin_sq < 0.0);
  CHECK(std::isnan(still.escape_margin()));
}

TEST_CASE("shell sampling") {
  ShellSpec spec;
  spec.count = 4000;
  spec.ell_min = 0.1;
  spec.ell_max = 0.3;
  const auto e = build_shell(spec).ensemble;
  CHECK(e.size() == 4000);
  CHECK(e.total_mass() == spec.mass);
  CHECK(e.mass.sum() == doctest::Approx(spec.mass).epsilon(1e-14));
  CHECK(e.r.minCoeff() >= spec.r_inner);
  CHECK(e.r.maxCoeff() <= spec.r_outer);
  CHECK(e.w.minCoeff() >= spec.w_min);
  CHECK(e.w.maxCoeff() <= spec.w_max);
  CHECK(e.ell.minCoeff() >= spec.ell_min);
  CHECK(e.ell.maxCoeff() <= spec.ell_max);
  for (Group g : e.group) CHECK(g == Group::shell);
  // uniform in enclosed mass of a constant-density shell: half the mass below this radius
  const double r_half = std::cbrt(0.5 * (1.0 + 8.0));
  CHECK(cumulative_mass(e, r_half) == doctest::Approx(0.5).epsilon(1e-3));

  const auto again = build_shell(spec).ensemble;
  CHECK((again.r == e.r).all());
  CHECK((again.w == e.w).all());
  CHECK((again.ell == e.ell).all());
  spec.seed = 2;
  CHECK_FALSE((build_shell(spec).ensemble.r == e.r).all());
}

TEST_CASE("invalid shell specs") {
  ShellSpec spec;
  spec.r_inner = 2.0;
  CHECK_THROWS_AS(build_shell(spec), DomainError);
  spec = {};
  spec.w_min = 2.0;
  CHECK_THROWS_AS(build_shell(spec), DomainError);
  spec = {};
  spec.ell_min = -0.1;
  CHECK_THROWS_AS(build_shell(spec), DomainError);
  spec = {};
  spec.count = 0;
  CHECK_THROWS_AS(build_shell(spec), DomainError);
}

TEST_CASE("circular-orbit uniform ball") {
  CoreSpec spec;
  spec.count = 100000;
  const auto e = build_circular_core(spec);
  const double ekin = kinetic_energy(e);
  const double epot = potential_energy(e);
  CHECK(ekin == doctest::Approx(3.0 / (40.0 * pi)).epsilon(0.01));
  CHECK(epot == doctest::Approx(3.0 / (20.0 * pi)).epsilon(0.01));
  CHECK(ekin - epot == doctest::Approx(-3.0 / (40.0 * pi)).epsilon(0.01));
  CHECK(std::abs(ekin - epot + ekin) / ekin <= 0.02);
  CHECK((e.w == 0.0).all());
  for (Group g : e.group) CHECK(g == Group::core);
  // stratified radii: sampled and analytic M(<r) differ by at most one particle
  // mass, so the i-th innermost shell is out of balance by about 1/(i+1)
  const Eigen::ArrayXd residual = acceleration(e).abs() / acceleration_scale(e);
  std::vector<Eigen::Index> order(e.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return e.r[i] < e.r[j]; });
  double worst = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    worst = std::max(worst, residual[order[rank]] * static_cast<double>(rank + 1));
  CHECK(worst <= 2.0);
}

TEST_CASE("tabulated core profile") {
  CoreSpec spec;
  spec.profile = CoreProfile::table;
  spec.mass = 2.0;
  spec.table = {{0.0, 0.0}, {1.0, 0.5}, {2.0, 1.0}};
  spec.count = 2000;
  CHECK(spec.enclosed_mass(1.0) == doctest::Approx(1.0));
  CHECK(spec.enclosed_mass(5.0) == 2.0);
  CHECK(spec.radius_at_fraction(0.75) == doctest::Approx(1.5));
  const auto e = build_circular_core(spec);
  CHECK(e.total_mass() == 2.0);
  CHECK(e.r.maxCoeff() <= 2.0);
  CHECK(cumulative_mass(e, 1.0) == doctest::Approx(1.0).epsilon(1e-2));

  spec.table = {{0.0, 0.0}, {1.0, 0.0}};
  CHECK_THROWS_AS(build_circular_core(spec), DomainError);
  CoreSpec empty;
  empty.mass = 0.0;
  CHECK_THROWS_AS(build_circular_core(empty), DomainError);
}

TEST_CASE("shell plus core") {
  CoreSpec core;
  core.count = 100000;
  ShellSpec shell;
  shell.mass = 0.1;
  shell.r_inner = 2.0;
  shell.r_outer = 2.5;
  shell.w_min = 0.35;
  shell.w_max = 0.6;
  shell.count = 2000;
  const auto b = build_shell_plus_core(core, shell);
  CHECK(b.ensemble.size() == 102000);
  CHECK(b.energy_core == doctest::Approx(-3.0 / (40.0 * pi)).epsilon(0.01));
  CHECK(b.shell_mass_bound == doctest::Approx(0.422).epsilon(2e-3));
  CHECK(b.escape_threshold == doctest::Approx(std::sqrt(1.1 / (4.0 * pi))).epsilon(1e-12));
  CHECK(b.negative_energy_window);
  CHECK(b.mass_below_bound);
  CHECK(b.energy_total < 0.0);

  // above the bound the double inequality has no room
  shell.mass = 0.5;
  const auto heavy = build_shell_plus_core(core, shell);
  CHECK_FALSE(heavy.mass_below_bound);
  CHECK_FALSE(heavy.negative_energy_window);

  shell.r_inner = 0.9;
  CHECK_THROWS_AS(build_shell_plus_core(core, shell), DomainError);
}
