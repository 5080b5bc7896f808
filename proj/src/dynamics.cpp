#include "vpdisp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vpdisp/errors.hpp"
#include "vpdisp/parallel.hpp"

namespace vpdisp {

using std::numbers::pi;

namespace {
constexpr double kEpsilon = 1e-300;
}

void IntegratorConfig::validate(double start_time) const {
  if (!(dt_initial > 0.0)) throw DomainError("dt_initial must be positive");
  if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw DomainError("dt_safety must lie in (0, 1]");
  if (!(output_cadence > 0.0)) throw DomainError("output_cadence must be positive");
  if (!(t_end >= start_time)) throw DomainError("t_end precedes the start time");
}

void TrajectorySink::append(DiagnosticsRecord record) {
  if (!records.empty() && !(record.time > records.back().time))
    throw DomainError("trajectory records must be strictly increasing in time");
  records.push_back(std::move(record));
}

Eigen::ArrayXd acceleration(const Ensemble& e, unsigned threads) {
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (!(e.r[i] > 0.0))
      throw SingularityError("acceleration: particle " + std::to_string(i) + " at r <= 0");
  const RadialOrder order(e);
  Eigen::ArrayXd a(e.size());
  parallel_for(static_cast<std::size_t>(e.size()), threads, [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double r = e.r[i];
    a[i] = e.ell[i] * e.ell[i] / (r * r * r) - order.enclosed[i] / (4.0 * pi * r * r);
  });
  return a;
}

Eigen::ArrayXd acceleration_scale(const Ensemble& e) {
  const RadialOrder order(e);
  const Eigen::ArrayXd centrifugal = e.ell.square() / e.r.cube();
  const Eigen::ArrayXd gravity = order.enclosed / (4.0 * pi * e.r.square());
  return centrifugal.max(gravity);
}

double adaptive_dt(const Ensemble& e, const IntegratorConfig& config) {
  if (e.empty()) throw DomainError("adaptive_dt: empty ensemble");
  const Eigen::ArrayXd a = acceleration_scale(e);
  const Eigen::ArrayXd drift = e.r / (e.w.abs() + kEpsilon);
  const Eigen::ArrayXd kick = (e.r / (a + kEpsilon)).sqrt();
  const double dt = config.dt_safety * std::min(drift.minCoeff(), kick.minCoeff());
  return std::clamp(dt, config.dt_min(), config.output_cadence);
}

Leapfrog::Leapfrog(Ensemble initial, IntegratorConfig config, unsigned threads)
    : state_(std::move(initial)), config_(config), threads_(threads) {
  accel_ = acceleration(state_, threads_);
}

bool Leapfrog::try_step(double dt) {
  const Eigen::ArrayXd w_half = state_.w + 0.5 * dt * accel_;
  Eigen::ArrayXd r_new = state_.r + dt * w_half;
  Eigen::ArrayXd w_new = w_half;
  for (Eigen::Index i = 0; i < r_new.size(); ++i) {
    if (r_new[i] > 0.0) continue;
    // Only a purely radial orbit passes through the center.
    if (state_.ell[i] == 0.0 && config_.reflection_enabled && r_new[i] < 0.0) {
      r_new[i] = -r_new[i];
      w_new[i] = -w_new[i];
    } else {
      return false;
    }
  }
  Ensemble next = state_;
  next.r = std::move(r_new);
  next.w = std::move(w_new);
  next.time = state_.time + dt;
  Eigen::ArrayXd a_new = acceleration(next, threads_);
  next.w += 0.5 * dt * a_new;
  state_ = std::move(next);
  accel_ = std::move(a_new);
  return true;
}

void Leapfrog::advance(double dt) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  if (try_step(dt)) return;
  ++rejected_;
  const double half = 0.5 * dt;
  if (half < config_.dt_min())
    throw StiffnessError("step rejected repeatedly below dt_min");
  advance(half);
  advance(half);
}

Ensemble step(Ensemble e, double dt, const IntegratorConfig& config) {
  Leapfrog lf(std::move(e), config);
  lf.advance(dt);
  return lf.state();
}

TrajectorySink run(Ensemble initial, const IntegratorConfig& config, const RunOptions& options) {
  initial.validate();
  const double t0 = initial.time;
  config.validate(t0);

  TrajectorySink sink;
  sink.snapshot_times = options.snapshot_times;
  std::sort(sink.snapshot_times.begin(), sink.snapshot_times.end());
  std::size_t next_snapshot = 0;

  auto emit = [&](const Ensemble& e) {
    sink.append(compute_diagnostics(e, options.diagnostics));
    while (next_snapshot < sink.snapshot_times.size() &&
           sink.snapshot_times[next_snapshot] <= e.time + 1e-12 * config.output_cadence) {
      sink.snapshots.push_back(e);
      ++next_snapshot;
    }
  };

  double t = t0;
  try {
    Leapfrog lf(std::move(initial), config, options.threads);
    emit(lf.state());
    // Outputs land exactly on t0 + n * cadence.
    const auto outputs = static_cast<long>(std::floor((config.t_end - t0) / config.output_cadence + 1e-9));
    for (long n = 1; n <= outputs; ++n) {
      const double target = t0 + static_cast<double>(n) * config.output_cadence;
      while (t < target) {
        double dt = adaptive_dt(lf.state(), config);
        const double remaining = target - t;
        // avoid leaving a sliver shorter than a tiny fraction of the step
        if (dt >= remaining || remaining - dt < 1e-6 * dt) dt = remaining;
        lf.advance(dt);
        t = dt == remaining ? target : lf.state().time;
      }
      Ensemble snap = lf.state();
      snap.time = target;
      emit(snap);
    }
  } catch (const NumericalFailure&) {
    throw;
  } catch (const SingularityError& err) {
    throw NumericalFailure(err.what(), t);
  } catch (const StiffnessError& err) {
    throw NumericalFailure(err.what(), t);
  }
  return sink;
}

}  // namespace vpdisp
