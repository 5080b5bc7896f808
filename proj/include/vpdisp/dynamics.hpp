#pragma once

// Characteristic flow of the reduced system
//   r' = w,  w' = ell^2 / r^3 - M(<r) / (4 pi r^2),  ell' = 0
// integrated with kick-drift-kick leapfrog.

#include <vector>

#include <Eigen/Core>

#include "vpdisp/core_model.hpp"

namespace vpdisp {

struct IntegratorConfig {
  double dt_initial = 1e-2;
  double dt_safety = 0.05;
  double t_end = 1.0;
  double output_cadence = 0.1;
  bool reflection_enabled = true;

  double dt_min() const noexcept { return 1e-12 * dt_initial; }

  /// Throws DomainError on dt_initial <= 0, dt_safety outside (0, 1],
  /// output_cadence <= 0 or t_end < start_time.
  void validate(double start_time = 0.0) const;
};

struct TrajectorySink {
  std::vector<DiagnosticsRecord> records;
  std::vector<double> snapshot_times;
  std::vector<Ensemble> snapshots;

  /// Appends a record; times must be strictly increasing.
  void append(DiagnosticsRecord record);
};

/// Radial acceleration of every particle from one sort of the radii.
Eigen::ArrayXd acceleration(const Ensemble& e, unsigned threads = 1);

/// Per-particle magnitude of the dominant force term,
/// max(ell^2 / r^3, M(<r) / (4 pi r^2)). Used for step-size control so that
/// force-balanced (circular) orbits still resolve their epicycles.
Eigen::ArrayXd acceleration_scale(const Ensemble& e);

/// dt_safety * min_i min(r_i / (|w_i| + eps), sqrt(r_i / (a_i + eps))),
/// clamped to [dt_min, output_cadence]; a_i is acceleration_scale.
double adaptive_dt(const Ensemble& e, const IntegratorConfig& config);

/// Single leapfrog step of size dt. A purely radial particle crossing the
/// center is reflected; a crossing with ell > 0 rejects the step, which is
/// then covered by two half steps (recursively, down to dt_min).
Ensemble step(Ensemble e, double dt, const IntegratorConfig& config = {});

/// Stateful leapfrog that keeps the end-of-step acceleration for the next
/// opening kick.
class Leapfrog {
 public:
  Leapfrog(Ensemble initial, IntegratorConfig config, unsigned threads = 1);

  void advance(double dt);
  const Ensemble& state() const noexcept { return state_; }
  const Eigen::ArrayXd& current_acceleration() const noexcept { return accel_; }
  long rejected_steps() const noexcept { return rejected_; }

 private:
  bool try_step(double dt);

  Ensemble state_;
  IntegratorConfig config_;
  unsigned threads_;
  Eigen::ArrayXd accel_;
  long rejected_ = 0;
};

struct RunOptions {
  DiagnosticsConfig diagnostics;
  std::vector<double> snapshot_times;
  unsigned threads = 1;
};

/// Integrates to config.t_end, recording diagnostics at every multiple of
/// output_cadence (including the start). Failures are rethrown as
/// NumericalFailure carrying the simulation time.
TrajectorySink run(Ensemble initial, const IntegratorConfig& config, const RunOptions& options = {});

}  // namespace vpdisp
