#pragma once

// Finite-horizon classification of diagnostic time series into dispersion
// regimes. Every limit t -> infinity is replaced by a trailing-window estimate
// plus a trend test; a limit that has not settled yields `undetermined`.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vpdisp/core_model.hpp"

namespace vpdisp {

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws DomainError unless times are strictly increasing, lengths match
  /// and all values are finite.
  void validate() const;
};

struct Estimate {
  double value = 0.0;
  double band = 0.0;
};

/// Settings that turn asymptotic definitions into finite-horizon tests.
struct ClassifierSettings {
  double window_fraction = 0.25;    ///< trailing window, as a fraction of the records
  double mass_tolerance = 1e-2;     ///< times M
  double strong_fraction = 1e-2;    ///< times the initial |rho|_q
  double virial_fraction = 1e-2;    ///< times |E| + E_kin(0)
  double flat_tolerance = 1e-3;     ///< relative spread for "steady"
  double period_tolerance = 1e-2;   ///< agreement of two consecutive periods
  double exponent_tolerance = 0.1;  ///< for the t^2 growth check
  double statistical_factor = 10.0; ///< variance growth proxy for sup = infinity
};

/// Least-squares slope of log(value) against log(t) over the trailing half
/// of the samples; band is twice the slope's standard error. Empty when there
/// are fewer than 10 positive-time samples, a non-positive value, or less
/// than one decade in t.
std::optional<Estimate> growth_exponent(const TimeSeries& series);

enum class ConcentrationVerdict { totally_dispersive, partially_dispersive, non_dispersive, not_converged };

std::string_view verdict_name(ConcentrationVerdict v);

struct ConcentrationLimits {
  std::vector<double> radii;
  std::vector<Estimate> mass_at_radius;  ///< trailing-window mean and spread
  std::vector<bool> converged;
  std::optional<Estimate> m_infinity;
  ConcentrationVerdict verdict = ConcentrationVerdict::not_converged;
};

/// M(R) for every R of `R_grid` present in the records, and M_infinity from
/// the plateau over the two largest radii.
ConcentrationLimits concentration_limits(const std::vector<DiagnosticsRecord>& records,
                                         const std::vector<double>& R_grid, double total_mass,
                                         const ClassifierSettings& settings = {});

struct StrongDispersionResult {
  double q = 0.0;
  bool dispersive = false;
  bool decreasing = false;
  double final_ratio = 1.0;  ///< last / first |rho|_q
  std::optional<Estimate> decay_exponent;
};

StrongDispersionResult strong_dispersion_test(const std::vector<DiagnosticsRecord>& records, double q,
                                              const ClassifierSettings& settings = {});

struct VirialResult {
  TimeSeries metric;  ///< (1/t) int_0^t (E + E_kin)
  double threshold = 0.0;
  bool virialized = false;
};

/// Trapezoidal running average of E + E_kin. The first sample holds the
/// integrand itself (the t -> 0 limit).
VirialResult virialization_metric(double energy, const TimeSeries& kinetic,
                                  const ClassifierSettings& settings = {});

struct PeriodicityResult {
  bool periodic = false;
  double period = 0.0;
  double second_period = 0.0;
};

/// Autocorrelation of a uniformly sampled series; periodic when the first
/// two autocorrelation peaks give periods agreeing within period_tolerance.
PeriodicityResult detect_periodicity(const TimeSeries& series, const ClassifierSettings& settings = {});

enum class Regime {
  steady,
  periodic,
  virialized,
  partially_dispersive,
  totally_dispersive,
  strongly_dispersive,
  undetermined,
};

std::string_view regime_name(Regime r);

enum class CheckOutcome { pass, fail, not_applicable };

std::string_view outcome_name(CheckOutcome o);

struct PropositionCheck {
  std::string id;
  std::string statement;
  CheckOutcome outcome = CheckOutcome::not_applicable;
};

struct ThresholdCheck {
  double energy = 0.0;
  double threshold = 0.0;  ///< |Q|^2 / (2M)
  double rest_frame_energy = 0.0;
};

struct ClassificationReport {
  Regime label = Regime::undetermined;
  bool statistically_dispersive = false;
  std::optional<Estimate> growth_exponent;
  std::optional<Estimate> m_infinity;
  ConcentrationLimits concentration;
  std::vector<StrongDispersionResult> strong;
  std::optional<VirialResult> virial;
  PeriodicityResult periodicity;
  bool flat = false;
  std::optional<bool> potential_energy_vanishes;
  /// |rho|_{5/3}^{5/3} t^2 / int |x - tp|^2 f at the last record (logged only).
  std::optional<double> interpolation_ratio;
  ThresholdCheck threshold;
  std::vector<PropositionCheck> consistency;
};

/// Pass/fail for each implication between energy thresholds and the label.
std::vector<PropositionCheck> check_propositions(double energy, double momentum, double mass,
                                                 const ClassificationReport& report,
                                                 const ClassifierSettings& settings = {});

/// Decision cascade: strong -> total -> partial -> periodic -> steady ->
/// virialized -> undetermined. `momentum` is |Q|.
/// Fewer than 10 records give `undetermined`.
ClassificationReport classify(const std::vector<DiagnosticsRecord>& records, double energy, double momentum,
                              double mass, const ClassifierSettings& settings = {});

}  // namespace vpdisp
