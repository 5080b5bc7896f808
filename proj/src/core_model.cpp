#include "vpdisp/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vpdisp/errors.hpp"
#include "vpdisp/parallel.hpp"
#include "vpdisp/summation.hpp"

namespace vpdisp {

using std::numbers::pi;

std::string_view group_name(Group g) {
  switch (g) {
    case Group::shell:
      return "shell";
    case Group::core:
      return "core";
    case Group::none:
      break;
  }
  return "none";
}

Ensemble::Ensemble(std::span<const ShellParticle> particles, double t) : time(t) {
  const auto n = static_cast<Eigen::Index>(particles.size());
  r.resize(n);
  w.resize(n);
  ell.resize(n);
  mass.resize(n);
  group.resize(particles.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = particles[static_cast<std::size_t>(i)];
    r[i] = p.r;
    w[i] = p.w;
    ell[i] = p.ell;
    mass[i] = p.mass;
    group[static_cast<std::size_t>(i)] = p.group;
  }
}

ShellParticle Ensemble::particle(Eigen::Index i) const {
  return {r[i], w[i], ell[i], mass[i], group[static_cast<std::size_t>(i)]};
}

std::vector<ShellParticle> Ensemble::particles() const {
  std::vector<ShellParticle> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (Eigen::Index i = 0; i < size(); ++i) out.push_back(particle(i));
  return out;
}

double Ensemble::total_mass() const {
  if (total_mass_cache) return *total_mass_cache;
  return pairwise_sum(mass);
}

void Ensemble::validate() const {
  if (w.size() != r.size() || ell.size() != r.size() || mass.size() != r.size() ||
      group.size() != static_cast<std::size_t>(r.size()))
    throw DomainError("ensemble arrays have inconsistent lengths");
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (!std::isfinite(r[i]) || !std::isfinite(w[i]) || !std::isfinite(ell[i]) ||
        !std::isfinite(mass[i]))
      throw DomainError("particle " + std::to_string(i) + " has a non-finite field");
    if (r[i] <= 0.0) throw DomainError("particle " + std::to_string(i) + " has r <= 0");
    if (mass[i] <= 0.0) throw DomainError("particle " + std::to_string(i) + " has mass <= 0");
    if (ell[i] < 0.0) throw DomainError("particle " + std::to_string(i) + " has ell < 0");
  }
}

Ensemble concatenate(const Ensemble& a, const Ensemble& b) {
  Ensemble out;
  out.time = a.time;
  const Eigen::Index n = a.size() + b.size();
  out.r.resize(n);
  out.w.resize(n);
  out.ell.resize(n);
  out.mass.resize(n);
  out.r << a.r, b.r;
  out.w << a.w, b.w;
  out.ell << a.ell, b.ell;
  out.mass << a.mass, b.mass;
  out.group = a.group;
  out.group.insert(out.group.end(), b.group.begin(), b.group.end());
  return out;
}

Ensemble select_group(const Ensemble& e, Group g) {
  std::vector<ShellParticle> picked;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (e.group[static_cast<std::size_t>(i)] == g) picked.push_back(e.particle(i));
  return Ensemble(picked, e.time);
}

namespace {

void require_non_empty(const Ensemble& e, const char* op) {
  if (e.empty()) throw DomainError(std::string(op) + ": empty ensemble");
}

std::vector<Eigen::Index> sort_by_radius(const Ensemble& e) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(e.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return e.r[a] < e.r[b] || (e.r[a] == e.r[b] && a < b);
  });
  return order;
}

}  // namespace

RadialOrder::RadialOrder(const Ensemble& e) : order(sort_by_radius(e)), enclosed(e.size()) {
  CompensatedSum running;
  std::size_t k = 0;
  while (k < order.size()) {
    // group of coincident radii: all see only the strictly smaller ones
    std::size_t end = k + 1;
    while (end < order.size() && e.r[order[end]] == e.r[order[k]]) ++end;
    const double below = running.value();
    for (std::size_t j = k; j < end; ++j) {
      enclosed[order[j]] = below;
      running.add(e.mass[order[j]]);
    }
    k = end;
  }
}

double cumulative_mass(const Ensemble& e, double r) {
  require_non_empty(e, "cumulative_mass");
  if (!std::isfinite(r)) throw DomainError("cumulative_mass: non-finite radius");
  if (r < 0.0) throw DomainError("cumulative_mass: negative radius");
  const Eigen::ArrayXd inside = (e.r < r).select(e.mass, 0.0);
  return pairwise_sum(inside);
}

double potential_energy(const Ensemble& e) {
  require_non_empty(e, "potential_energy");
  if ((e.r <= 0.0).any()) throw DomainError("potential_energy: particle with r <= 0");
  const auto order = sort_by_radius(e);
  const std::size_t n = order.size();
  std::vector<double> terms(n);
  CompensatedSum enclosed;
  for (std::size_t k = 0; k < n; ++k) {
    enclosed.add(e.mass[order[k]]);
    const double m = enclosed.value();
    const double ri = e.r[order[k]];
    terms[k] = k + 1 < n ? m * m * (1.0 / ri - 1.0 / e.r[order[k + 1]]) : m * m / ri;
  }
  return pairwise_sum(terms) / (8.0 * pi);
}

double interaction_energy(const Ensemble& e) {
  require_non_empty(e, "interaction_energy");
  if ((e.r <= 0.0).any()) throw DomainError("interaction_energy: particle with r <= 0");
  const RadialOrder ro(e);
  const Eigen::ArrayXd terms = e.mass * ro.enclosed / e.r;
  return pairwise_sum(terms) / (4.0 * pi);
}

double kinetic_energy(const Ensemble& e) {
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (e.r[i] <= 0.0 && e.ell[i] > 0.0)
      throw SingularityError("kinetic_energy: particle " + std::to_string(i) +
                             " at r = 0 with ell > 0");
  const Eigen::ArrayXd tangential = (e.ell > 0.0).select(e.ell.square() / e.r.square(), 0.0);
  const Eigen::ArrayXd terms = 0.5 * e.mass * (e.w.square() + tangential);
  return pairwise_sum(terms);
}

double statistical_dispersion(const Ensemble& e) {
  require_non_empty(e, "statistical_dispersion");
  const Eigen::ArrayXd terms = e.mass * e.r.square();
  return pairwise_sum(terms) / e.total_mass();
}

double dilation_moment(const Ensemble& e) {
  const Eigen::ArrayXd terms = e.mass * e.r * e.w;
  return pairwise_sum(terms);
}

double conformal_moment(const Ensemble& e, double t) {
  if ((e.r <= 0.0).any()) throw DomainError("conformal_moment: particle with r <= 0");
  const Eigen::ArrayXd p2 = e.w.square() + e.ell.square() / e.r.square();
  const Eigen::ArrayXd terms = e.mass * (e.r.square() - 2.0 * t * e.r * e.w + t * t * p2);
  return std::max(0.0, pairwise_sum(terms));
}

namespace {

// Fraction of the sphere of radius r lying inside the ball B(x0, R), |x0| = d > 0.
double cap_fraction(double r, double d, double R) {
  const double mu = (r * r + d * d - R * R) / (2.0 * d * r);
  return std::clamp(0.5 * (1.0 - mu), 0.0, 1.0);
}

}  // namespace

double concentration_mass(const Ensemble& e, double d, double R) {
  if (!(R > 0.0)) throw DomainError("concentration_mass: R must be positive");
  if (!(d >= 0.0)) throw DomainError("concentration_mass: d must be non-negative");
  std::vector<double> contrib(static_cast<std::size_t>(e.size()));
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double f = d == 0.0 ? (e.r[i] < R ? 1.0 : 0.0) : cap_fraction(e.r[i], d, R);
    contrib[static_cast<std::size_t>(i)] = e.mass[i] * f;
  }
  return pairwise_sum(contrib);
}

ConcentrationEvaluator::ConcentrationEvaluator(const Ensemble& e) {
  const auto order = sort_by_radius(e);
  radii_.reserve(order.size());
  masses_.reserve(order.size());
  prefix_.reserve(order.size() + 1);
  prefix_.push_back(0.0);
  CompensatedSum running;
  for (auto i : order) {
    radii_.push_back(e.r[i]);
    masses_.push_back(e.mass[i]);
    running.add(e.mass[i]);
    prefix_.push_back(running.value());
  }
  total_ = prefix_.back();
}

double ConcentrationEvaluator::mass_in_ball(double d, double R) const {
  if (!(R > 0.0)) throw DomainError("concentration_mass: R must be positive");
  if (!(d >= 0.0)) throw DomainError("concentration_mass: d must be non-negative");
  const auto rank_below = [&](double x) {
    return static_cast<std::size_t>(std::lower_bound(radii_.begin(), radii_.end(), x) - radii_.begin());
  };
  if (d == 0.0) return prefix_[rank_below(R)];

  // Shells with r <= R - d lie wholly inside; shells with |r - d| < R are cut.
  const std::size_t band_lo = rank_below(std::abs(d - R));
  const std::size_t band_hi =
      static_cast<std::size_t>(std::upper_bound(radii_.begin(), radii_.end(), d + R) - radii_.begin());
  CompensatedSum sum;
  if (d < R) sum.add(prefix_[band_lo]);
  for (std::size_t k = band_lo; k < band_hi; ++k) sum.add(masses_[k] * cap_fraction(radii_[k], d, R));
  return std::clamp(sum.value(), 0.0, total_);
}

ConcentrationEvaluator::Maximum ConcentrationEvaluator::maximize(double R, int grid_points,
                                                                 double rel_tol) const {
  if (!(R > 0.0)) throw DomainError("concentration_function: R must be positive");
  if (radii_.empty()) return {0.0, 0.0};
  const double outer = radii_.back();
  if (R > outer) return {0.0, total_};

  grid_points = std::max(grid_points, 3);
  const double span = outer + R;
  const double h = span / (grid_points - 1);
  Maximum best{0.0, mass_in_ball(0.0, R)};
  int best_j = 0;
  for (int j = 1; j < grid_points; ++j) {
    const double d = j * h;
    const double m = mass_in_ball(d, R);
    if (m > best.mass) {
      best = {d, m};
      best_j = j;
    }
  }

  // golden-section refinement on the bracket around the best grid point
  constexpr double inv_phi = 0.6180339887498949;
  double a = std::max(0.0, (best_j - 1) * h);
  double b = std::min(span, (best_j + 1) * h);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = mass_in_ball(x1, R);
  double f2 = mass_in_ball(x2, R);
  const double tol = rel_tol * span;
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = mass_in_ball(x2, R);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = mass_in_ball(x1, R);
    }
  }
  if (f1 > best.mass) best = {x1, f1};
  if (f2 > best.mass) best = {x2, f2};
  return best;
}

double concentration_function(const Ensemble& e, double R) {
  if (!(R > 0.0)) throw DomainError("concentration_function: R must be positive");
  return ConcentrationEvaluator(e).maximize(R).mass;
}

double RadialDensityProfile::shell_volume(std::size_t k) const {
  const double lo = bin_edges[k];
  const double hi = bin_edges[k + 1];
  return 4.0 * pi / 3.0 * (hi * hi * hi - lo * lo * lo);
}

double RadialDensityProfile::binned_mass() const {
  std::vector<double> m(bins());
  for (std::size_t k = 0; k < bins(); ++k) m[k] = bin_density[k] * shell_volume(k);
  return pairwise_sum(m);
}

int default_bin_count(Eigen::Index n) {
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
}

namespace {

RadialDensityProfile uniform_profile(const Ensemble& e, int n_bins) {
  const double outer = e.r.maxCoeff();
  RadialDensityProfile p;
  p.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int k = 0; k <= n_bins; ++k) p.bin_edges[static_cast<std::size_t>(k)] = outer * k / n_bins;
  p.bin_edges.back() = outer;
  std::vector<CompensatedSum> mass(static_cast<std::size_t>(n_bins));
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    auto k = static_cast<int>(std::floor(e.r[i] / outer * n_bins));
    k = std::clamp(k, 0, n_bins - 1);
    mass[static_cast<std::size_t>(k)].add(e.mass[i]);
  }
  p.bin_density.resize(static_cast<std::size_t>(n_bins));
  for (std::size_t k = 0; k < p.bins(); ++k) {
    const double v = p.shell_volume(k);
    p.bin_density[k] = v > 0.0 ? mass[k].value() / v : 0.0;
  }
  return p;
}

// Bins of (nearly) equal particle count; the lower edge of each bin is the
// radius of its first particle, so the density estimate tracks the local
// inter-particle spacing at every scale.
RadialDensityProfile equal_mass_profile(const Ensemble& e, int n_bins) {
  const auto order = sort_by_radius(e);
  const std::size_t n = order.size();
  n_bins = std::min<int>(n_bins, static_cast<int>(n / 2));
  if (n_bins < 1) return uniform_profile(e, 1);

  std::vector<double> edges;
  std::vector<double> masses;
  CompensatedSum pending;
  for (int k = 0; k < n_bins; ++k) {
    const std::size_t lo = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(n_bins);
    const std::size_t hi = n * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(n_bins);
    for (std::size_t j = lo; j < hi; ++j) pending.add(e.mass[order[j]]);
    const double lower = e.r[order[lo]];
    const double upper = hi < n ? e.r[order[hi]] : e.r[order[n - 1]];
    if (edges.empty()) edges.push_back(lower);
    if (upper > edges.back()) {
      edges.push_back(upper);
      masses.push_back(pending.value());
      pending = CompensatedSum{};
    }
  }
  if (masses.empty()) return uniform_profile(e, 1);
  if (pending.value() > 0.0) masses.back() += pending.value();

  RadialDensityProfile p;
  p.bin_edges = std::move(edges);
  p.bin_density.resize(masses.size());
  for (std::size_t k = 0; k < masses.size(); ++k) p.bin_density[k] = masses[k] / p.shell_volume(k);
  return p;
}

}  // namespace

RadialDensityProfile build_radial_profile(const Ensemble& e, int n_bins, Binning binning) {
  require_non_empty(e, "build_radial_profile");
  if (n_bins < 1) throw DomainError("build_radial_profile: n_bins must be >= 1");
  return binning == Binning::uniform ? uniform_profile(e, n_bins) : equal_mass_profile(e, n_bins);
}

double lq_norm(const RadialDensityProfile& profile, double q) {
  if (!(q >= 1.0)) throw DomainError("lq_norm: q must be >= 1");
  std::vector<double> terms(profile.bins());
  for (std::size_t k = 0; k < profile.bins(); ++k) {
    const double lo = profile.bin_edges[k];
    const double hi = profile.bin_edges[k + 1];
    const double mid = 0.5 * (lo + hi);
    terms[k] = 4.0 * pi * mid * mid * (hi - lo) * std::pow(profile.bin_density[k], q);
  }
  return std::pow(pairwise_sum(terms), 1.0 / q);
}

GalileanState galilean_shift(double energy, const Eigen::Vector3d& momentum, double mass,
                             const Eigen::Vector3d& u) {
  if (!(mass > 0.0)) throw DomainError("galilean_shift: mass must be positive");
  return {energy - momentum.dot(u) + 0.5 * mass * u.squaredNorm(), momentum - mass * u};
}

double rest_frame_energy(double energy, const Eigen::Vector3d& momentum, double mass) {
  if (!(mass > 0.0)) throw DomainError("rest_frame_energy: mass must be positive");
  return energy - momentum.squaredNorm() / (2.0 * mass);
}

DiagnosticsRecord compute_diagnostics(const Ensemble& e, const DiagnosticsConfig& config) {
  require_non_empty(e, "compute_diagnostics");
  DiagnosticsRecord rec;
  rec.time = e.time;
  const double ekin = kinetic_energy(e);
  const double epot = potential_energy(e);
  rec.energy_kinetic = ekin;
  rec.energy_potential = epot;
  rec.energy_total = ekin - epot;
  rec.mass = e.total_mass();
  rec.variance = statistical_dispersion(e);
  rec.dilation_moment = dilation_moment(e);
  rec.conformal_moment = conformal_moment(e, e.time);
  rec.inner_radius = e.r.minCoeff();
  rec.outer_radius = e.r.maxCoeff();
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (e.group[static_cast<std::size_t>(i)] != Group::shell) continue;
    rec.inner_radius_shell = rec.inner_radius_shell ? std::min(*rec.inner_radius_shell, e.r[i]) : e.r[i];
  }

  const ConcentrationEvaluator conc(e);
  std::vector<double> values(config.R_grid.size());
  parallel_for(values.size(), config.threads,
               [&](std::size_t k) { values[k] = conc.maximize(config.R_grid[k]).mass; }, 1);
  for (std::size_t k = 0; k < values.size(); ++k) rec.concentration.emplace_back(config.R_grid[k], values[k]);

  if (!config.q_list.empty()) {
    const int bins = config.n_bins > 0 ? config.n_bins : default_bin_count(e.size());
    const auto profile = build_radial_profile(e, bins, config.binning);
    for (double q : config.q_list) rec.lq_norms.emplace_back(q, lq_norm(profile, q));
  }
  return rec;
}

}  // namespace vpdisp
