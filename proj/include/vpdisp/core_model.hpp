#pragma once

// Reduced phase-space representation of a spherically symmetric
// Vlasov-Poisson state and its instantaneous diagnostics.
//
// Units are fixed by m = 4*pi*G = 1: Delta U = rho, and a shell at radius r
// feels the radial field M(<r) / (4 pi r^2).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace vpdisp {

/// Opaque subpopulation label carried by every particle.
enum class Group : std::uint8_t { none = 0, shell = 1, core = 2 };

std::string_view group_name(Group g);

/// One spherically averaged mass shell: radius r, radial momentum w = x.p/r,
/// angular-momentum modulus ell = |x ^ p| and mass.
struct ShellParticle {
  double r = 1.0;
  double w = 0.0;
  double ell = 0.0;
  double mass = 1.0;
  Group group = Group::none;
};

/// Discrete representation of f(t): structure-of-arrays over shell particles.
///
/// Spherical symmetry is exact in this representation, so the total linear
/// momentum, the angular-momentum vector and the center of mass all vanish.
struct Ensemble {
  double time = 0.0;
  Eigen::ArrayXd r;
  Eigen::ArrayXd w;
  Eigen::ArrayXd ell;
  Eigen::ArrayXd mass;
  std::vector<Group> group;
  std::optional<double> total_mass_cache;

  Ensemble() = default;
  explicit Ensemble(std::span<const ShellParticle> particles, double t = 0.0);

  Eigen::Index size() const noexcept { return r.size(); }
  bool empty() const noexcept { return r.size() == 0; }
  ShellParticle particle(Eigen::Index i) const;
  std::vector<ShellParticle> particles() const;

  /// Sum of masses (pairwise); uses the cache when present.
  double total_mass() const;

  /// Throws DomainError if any particle violates r > 0, mass > 0, ell >= 0
  /// or has a non-finite field.
  void validate() const;
};

/// Concatenates particle lists; time is taken from `a`.
Ensemble concatenate(const Ensemble& a, const Ensemble& b);

/// Particles whose group matches `g`, in their original order.
Ensemble select_group(const Ensemble& e, Group g);

/// Radii sorted by (r, index) together with the strictly enclosed mass of
/// each particle: the mass of all particles with strictly smaller radius.
/// Coincident radii do not see each other.
struct RadialOrder {
  std::vector<Eigen::Index> order;  // order[k] = particle index at rank k
  Eigen::ArrayXd enclosed;          // per particle (original indexing)

  explicit RadialOrder(const Ensemble& e);
};

double cumulative_mass(const Ensemble& e, double r);
double potential_energy(const Ensemble& e);

/// Mutual gravitational energy sum_{i<j} m_i m_j / (4 pi max(r_i, r_j)).
/// E_kin minus this is the exact Hamiltonian of the self-excluding shell
/// dynamics; it differs from potential_energy by the shell self-energies.
double interaction_energy(const Ensemble& e);

double kinetic_energy(const Ensemble& e);
double statistical_dispersion(const Ensemble& e);
double dilation_moment(const Ensemble& e);
double conformal_moment(const Ensemble& e, double t);

/// Mass of the ensemble inside the ball of radius R centered at distance d
/// from the origin. Each shell contributes the fraction of its sphere that
/// lies inside the ball.
double concentration_mass(const Ensemble& e, double d, double R);

/// sup over ball centers of concentration_mass (Levy concentration function).
double concentration_function(const Ensemble& e, double R);

/// Repeated concentration queries against one snapshot. Holds sorted radii
/// and prefix masses so each evaluation only visits the shells cut by the
/// ball boundary.
class ConcentrationEvaluator {
 public:
  explicit ConcentrationEvaluator(const Ensemble& e);

  double mass_in_ball(double d, double R) const;

  struct Maximum {
    double center;
    double mass;
  };
  /// Grid of `grid_points` centers on [0, R2 + R] followed by golden-section
  /// refinement around the best grid point.
  Maximum maximize(double R, int grid_points = 256, double rel_tol = 1e-6) const;

  double total_mass() const noexcept { return total_; }

 private:
  std::vector<double> radii_;
  std::vector<double> masses_;
  std::vector<double> prefix_;  // prefix_[k] = mass of the first k sorted shells
  double total_ = 0.0;
};

enum class Binning {
  uniform,     ///< equal-width bins on [0, R2]
  equal_mass,  ///< bins holding equal particle counts, edges at particle radii
};

struct RadialDensityProfile {
  std::vector<double> bin_edges;
  std::vector<double> bin_density;

  std::size_t bins() const noexcept { return bin_density.size(); }
  double shell_volume(std::size_t k) const;
  double binned_mass() const;
};

/// Default bin count: ceil(sqrt(N)).
int default_bin_count(Eigen::Index n);

RadialDensityProfile build_radial_profile(const Ensemble& e, int n_bins,
                                          Binning binning = Binning::uniform);

/// (sum_k 4 pi rbar_k^2 dr_k rho_k^q)^(1/q) with rbar_k the bin midpoint.
double lq_norm(const RadialDensityProfile& profile, double q);

struct GalileanState {
  double energy;
  Eigen::Vector3d momentum;
};

/// Energy and momentum seen in a frame boosted by velocity u.
/// E - |Q|^2 / (2M) is invariant.
GalileanState galilean_shift(double energy, const Eigen::Vector3d& momentum, double mass,
                             const Eigen::Vector3d& u);

/// E - |Q|^2 / (2M): the boost-invariant part of the energy.
double rest_frame_energy(double energy, const Eigen::Vector3d& momentum, double mass);

struct DiagnosticsConfig {
  std::vector<double> R_grid{1.0, 2.0, 5.0, 10.0};
  std::vector<double> q_list{5.0 / 3.0, 2.0, 3.0};
  int n_bins = 0;  ///< 0 selects default_bin_count
  Binning binning = Binning::equal_mass;
  unsigned threads = 1;
};

/// One time sample of every monitored quantity. Fields the analytic Kurth
/// evaluation does not provide are left empty.
struct DiagnosticsRecord {
  double time = 0.0;
  double energy_total = 0.0;
  std::optional<double> energy_kinetic;
  std::optional<double> energy_potential;
  double mass = 0.0;
  double variance = 0.0;
  std::optional<double> dilation_moment;
  std::optional<double> conformal_moment;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  std::optional<double> inner_radius_shell;
  std::vector<std::pair<double, double>> concentration;  // (R, M_R)
  std::vector<std::pair<double, double>> lq_norms;       // (q, |rho|_q)
};

DiagnosticsRecord compute_diagnostics(const Ensemble& e, const DiagnosticsConfig& config);

}  // namespace vpdisp
