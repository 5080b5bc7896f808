#include "vpdisp/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vpdisp/errors.hpp"

namespace vpdisp {

using std::numbers::pi;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum Stream : std::uint64_t { kRadius = 1, kMomentum = 2, kAngular = 3 };

}  // namespace

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
  // 53 random bits, strictly inside (0, 1)
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

void ShellSpec::validate() const {
  if (!(mass > 0.0)) throw DomainError("shell mass must be positive");
  if (!(r_inner > 0.0 && r_inner < r_outer)) throw DomainError("shell needs 0 < r_inner < r_outer");
  if (!(w_min <= w_max)) throw DomainError("shell needs w_min <= w_max");
  if (!(ell_min >= 0.0 && ell_min <= ell_max)) throw DomainError("shell needs 0 <= ell_min <= ell_max");
  if (count < 1) throw DomainError("shell needs at least one particle");
  if (!std::isfinite(r_outer) || !std::isfinite(w_min) || !std::isfinite(w_max) || !std::isfinite(ell_max))
    throw DomainError("shell parameters must be finite");
}

double ShellBuild::escape_margin() const {
  return escape_margin_sq >= 0.0 ? std::sqrt(escape_margin_sq) : std::numeric_limits<double>::quiet_NaN();
}

ShellBuild build_shell(const ShellSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.count);
  Ensemble e;
  e.r.resize(n);
  e.w.resize(n);
  e.ell.resize(n);
  e.mass = Eigen::ArrayXd::Constant(n, spec.mass / static_cast<double>(n));
  e.group.assign(static_cast<std::size_t>(n), Group::shell);
  const double r1_cubed = spec.r_inner * spec.r_inner * spec.r_inner;
  const double r2_cubed = spec.r_outer * spec.r_outer * spec.r_outer;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    const double u = (static_cast<double>(i) + uniform01(spec.seed, kRadius, idx)) / static_cast<double>(n);
    e.r[i] = std::cbrt(r1_cubed + u * (r2_cubed - r1_cubed));
    e.w[i] = spec.w_min + (spec.w_max - spec.w_min) * uniform01(spec.seed, kMomentum, idx);
    e.ell[i] = spec.ell_min + (spec.ell_max - spec.ell_min) * uniform01(spec.seed, kAngular, idx);
  }
  e.total_mass_cache = spec.mass;

  const double threshold_sq = spec.mass / (2.0 * pi * spec.r_inner);
  ShellBuild out{std::move(e), std::sqrt(threshold_sq), spec.w_min * spec.w_min - threshold_sq,
                 spec.w_min > std::sqrt(threshold_sq)};
  // w_min <= 0 never escapes, whatever the magnitude
  if (spec.w_min <= 0.0) out.escape_condition = false;
  return out;
}

void CoreSpec::validate() const {
  if (!(radius > 0.0) && profile == CoreProfile::uniform) throw DomainError("core radius must be positive");
  if (!(mass > 0.0)) throw DomainError("core profile has zero mass");
  if (count < 1) throw DomainError("core needs at least one particle");
  if (profile == CoreProfile::table) {
    if (table.size() < 2) throw DomainError("core table needs at least two entries");
    if (table.front().first != 0.0 || table.front().second != 0.0)
      throw DomainError("core table must start at (0, 0)");
    for (std::size_t i = 1; i < table.size(); ++i)
      if (!(table[i].first > table[i - 1].first) || !(table[i].second >= table[i - 1].second))
        throw DomainError("core table must be increasing in r and non-decreasing in M");
    if (!(table.back().second > 0.0)) throw DomainError("core profile has zero mass");
  }
}

double CoreSpec::outer_radius() const { return profile == CoreProfile::uniform ? radius : table.back().first; }

double CoreSpec::enclosed_mass(double r) const {
  if (r <= 0.0) return 0.0;
  if (profile == CoreProfile::uniform) {
    const double x = std::min(r / radius, 1.0);
    return mass * x * x * x;
  }
  const double scale = mass / table.back().second;
  if (r >= table.back().first) return mass;
  const auto it = std::upper_bound(table.begin(), table.end(), r,
                                   [](double v, const auto& entry) { return v < entry.first; });
  const auto& [r1, m1] = *it;
  const auto& [r0, m0] = *(it - 1);
  return scale * (m0 + (m1 - m0) * (r - r0) / (r1 - r0));
}

double CoreSpec::radius_at_fraction(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (profile == CoreProfile::uniform) return radius * std::cbrt(u);
  const double target = u * table.back().second;
  const auto it = std::lower_bound(table.begin(), table.end(), target,
                                   [](const auto& entry, double v) { return entry.second < v; });
  if (it == table.begin()) return table.front().first;
  if (it == table.end()) return table.back().first;
  const auto& [r1, m1] = *it;
  const auto& [r0, m0] = *(it - 1);
  return m1 > m0 ? r0 + (r1 - r0) * (target - m0) / (m1 - m0) : r0;
}

Ensemble build_circular_core(const CoreSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.count);
  Ensemble e;
  e.r.resize(n);
  e.w = Eigen::ArrayXd::Zero(n);
  e.ell.resize(n);
  e.mass = Eigen::ArrayXd::Constant(n, spec.mass / static_cast<double>(n));
  e.group.assign(static_cast<std::size_t>(n), Group::core);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u =
        (static_cast<double>(i) + uniform01(spec.seed, kRadius, static_cast<std::uint64_t>(i))) /
        static_cast<double>(n);
    double r = spec.radius_at_fraction(u);
    if (!(r > 0.0)) r = std::numeric_limits<double>::min();
    e.r[i] = r;
    e.ell[i] = std::sqrt(r * spec.enclosed_mass(r) / (4.0 * pi));
  }
  e.total_mass_cache = spec.mass;
  return e;
}

ShellCoreBuild build_shell_plus_core(const CoreSpec& core_spec, const ShellSpec& shell_spec) {
  core_spec.validate();
  shell_spec.validate();
  if (!(shell_spec.r_inner > core_spec.outer_radius()))
    throw DomainError("shell must lie strictly outside the core");

  const Ensemble core = build_circular_core(core_spec);
  ShellBuild shell = build_shell(shell_spec);
  Ensemble all = concatenate(core, shell.ensemble);
  all.total_mass_cache = core_spec.mass + shell_spec.mass;

  const double m0 = core_spec.mass;
  const double m = shell_spec.mass;
  const double r1 = shell_spec.r_inner;
  const double e0 = kinetic_energy(core) - potential_energy(core);

  const Ensemble& s = shell.ensemble;
  const double inf_w_sq = s.w.square().minCoeff();
  const double sup_p_sq = (s.w.square() + s.ell.square() / s.r.square()).maxCoeff();
  const double threshold_sq = (m0 + m) / (2.0 * pi * r1);
  const double discriminant = m0 * m0 - 16.0 * pi * e0 * r1;

  ShellCoreBuild out{std::move(all),
                     std::sqrt(threshold_sq),
                     0.0,
                     e0,
                     discriminant >= 0.0 ? 0.5 * (-m0 + std::sqrt(discriminant)) : 0.0,
                     inf_w_sq,
                     sup_p_sq,
                     false,
                     false};
  out.energy_total = kinetic_energy(out.ensemble) - potential_energy(out.ensemble);
  out.negative_energy_window = shell_spec.w_min > 0.0 && threshold_sq < inf_w_sq && inf_w_sq <= sup_p_sq &&
                               sup_p_sq < -2.0 * e0 / m;
  out.mass_below_bound = m > 0.0 && m < out.shell_mass_bound;
  return out;
}

}  // namespace vpdisp
