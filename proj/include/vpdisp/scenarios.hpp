#pragma once

// Deterministic initial configurations: an outward-moving shell, a static
// core built from circular orbits, and the shell surrounding the core.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vpdisp/core_model.hpp"

namespace vpdisp {

/// Counter-based uniform variates: the value for (seed, stream, index) does
/// not depend on how many other values were drawn.
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct ShellSpec {
  double mass = 1.0;
  double r_inner = 1.0;
  double r_outer = 2.0;
  double w_min = 0.5;
  double w_max = 1.5;
  double ell_min = 0.0;
  double ell_max = 0.0;
  int count = 10000;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class CoreProfile { uniform, table };

struct CoreSpec {
  double mass = 1.0;
  double radius = 1.0;
  CoreProfile profile = CoreProfile::uniform;
  /// For CoreProfile::table: (r, M(<r)) pairs, increasing in both, starting
  /// at (0, 0); rescaled so that the last entry carries `mass`. M(<r) is
  /// interpolated linearly.
  std::vector<std::pair<double, double>> table;
  int count = 10000;
  std::uint64_t seed = 1;

  void validate() const;
  /// Analytic cumulative mass of the target profile.
  double enclosed_mass(double r) const;
  /// Radius enclosing the mass fraction u in [0, 1].
  double radius_at_fraction(double u) const;
  double outer_radius() const;
};

struct ShellBuild {
  Ensemble ensemble;
  double escape_threshold;  ///< sqrt(M / (2 pi R1))
  double escape_margin_sq;  ///< W^2 = w_min^2 - M / (2 pi R1)
  bool escape_condition;    ///< w_min > threshold

  double escape_margin() const;  ///< W, or NaN when W^2 < 0
};

/// Radii uniform in enclosed mass of a constant-density shell, w and ell
/// uniform on their ranges; every particle tagged Group::shell.
ShellBuild build_shell(const ShellSpec& spec);

/// Stratified inverse-transform radii, w = 0 and ell^2 = r M_target(<r) / (4 pi)
/// from the analytic target profile; every particle tagged Group::core.
Ensemble build_circular_core(const CoreSpec& spec);

struct ShellCoreBuild {
  Ensemble ensemble;
  double escape_threshold;  ///< sqrt((M0 + m) / (2 pi R1))
  double energy_total;
  double energy_core;                ///< E0, measured on the core alone
  double shell_mass_bound;           ///< 1/2 [-M0 + sqrt(M0^2 - 16 pi E0 R1)]
  double inf_w_sq;                   ///< min over shell of w^2
  double sup_p_sq;                   ///< max over shell of w^2 + ell^2 / r^2
  bool negative_energy_window;       ///< (M0+m)/(2 pi R1) < inf w^2 <= sup |p|^2 < -2 E0 / m
  bool mass_below_bound;             ///< 0 < m < shell_mass_bound
};

ShellCoreBuild build_shell_plus_core(const CoreSpec& core, const ShellSpec& shell);

}  // namespace vpdisp
