#pragma once

// Kurth's homologous solution: a uniform ball of radius phi(t) with
//   phi^3 phi'' + phi = 1,  phi(0) = 1,  phi'(0) = k,
// and first integral E_K = 3/5 (phi'^2 + phi^-2 - 2 phi^-1).

#include <vector>

#include "vpdisp/core_model.hpp"

namespace vpdisp {

enum class KurthRegime { static_state, periodic, dispersive };

std::string_view regime_name(KurthRegime regime);

struct KurthState {
  double t = 0.0;
  double phi = 1.0;
  double phi_dot = 0.0;
};

/// 3/5 (k^2 - 1).
double kurth_energy(double k);

/// First integral evaluated on a state.
double kurth_first_integral(const KurthState& s);

KurthRegime classify_k(double k);

struct KurthIntegratorOptions {
  /// Base step; the working step is base_step * min(phi^{3/2}, cap) so that it
  /// follows the local dynamical time.
  double base_step = 2e-3;
  double growth_cap = 50.0;
};

/// Samples of the trajectory at t = 0, dt, 2 dt, ... up to t_end, integrated
/// with the fourth-order (triple-jump) composition of leapfrog.
std::vector<KurthState> integrate_phi(double k, double t_end, double dt,
                                      const KurthIntegratorOptions& options = {});

/// Closed form for |k| = 1 on the expanding branch:
/// phi = (1 + v^2) / 2 with v + v^3 / 3 = 2 (t + 2/3).
double phi_parabolic(double t);

/// phi' on the same branch (v / phi).
double phi_dot_parabolic(double t);

/// Closed form for |k| > 1 on the expanding branch:
/// phi = (|k| cosh u - 1) / (k^2 - 1) with
/// |k| sinh u - u = (k^2 - 1)^{3/2} (t - t0), u >= arccosh|k|.
double phi_hyperbolic(double t, double k);

double phi_dot_hyperbolic(double t, double k);

/// The parameter u(t) of the hyperbolic closed form.
double hyperbolic_parameter(double t, double k);

/// t0 of the hyperbolic closed form, fixed by phi(0) = 1.
double hyperbolic_time_offset(double k);

struct TurningPoints {
  double phi_min;
  double phi_max;
};

/// Roots of phi' = 0 for 0 < |k| < 1.
TurningPoints kurth_turning_points(double k);

/// Oscillation period for 0 < |k| < 1 by quadrature between the turning points.
double kurth_period(double k);

/// State at time t: closed forms on the expanding branches, ODE integration
/// otherwise (periodic and contracting cases).
KurthState kurth_state(double k, double t);

/// Kinetic / potential split of E_K consistent with a uniform ball in the
/// same normalization: E_kin = 3/5 (phi'^2 + phi^-2), E_pot = 6/5 phi^-1.
struct KurthEnergySplit {
  double kinetic;
  double potential;
};
KurthEnergySplit kurth_energy_split(const KurthState& s);

/// Analytic diagnostics of the uniform ball: M = 1, variance 3/5 phi^2,
/// |rho|_q closed form, support [0, phi], concentration min(1, (R/phi)^3).
/// The kinetic/potential columns are left empty.
DiagnosticsRecord kurth_diagnostics(const KurthState& s, const std::vector<double>& q_list,
                                    const std::vector<double>& R_grid = {});

/// Closed-form |rho|_q for the Kurth density at radius phi.
double kurth_lq_norm(double phi, double q);

}  // namespace vpdisp
