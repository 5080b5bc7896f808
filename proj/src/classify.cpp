#include "vpdisp/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vpdisp/errors.hpp"

namespace vpdisp {

void TimeSeries::validate() const {
  if (times.size() != values.size()) throw DomainError("time series: length mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
      throw DomainError("time series: non-finite entry at " + std::to_string(i));
    if (i > 0 && !(times[i] > times[i - 1])) throw DomainError("time series: times not strictly increasing");
  }
}

namespace {

constexpr std::size_t kMinimumRecords = 10;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  if (sxx <= 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double res = y[i] - (f.intercept + f.slope * x[i]);
      ss += res * res;
    }
    f.slope_stderr = std::sqrt(ss / (n - 2.0) / sxx);
  }
  return f;
}

std::size_t window_length(std::size_t n, const ClassifierSettings& s) {
  const auto w = static_cast<std::size_t>(std::ceil(s.window_fraction * static_cast<double>(n)));
  return std::min(n, std::max<std::size_t>(w, 3));
}

template <typename Get>
TimeSeries extract(const std::vector<DiagnosticsRecord>& records, Get get) {
  TimeSeries s;
  for (const auto& r : records) {
    const std::optional<double> v = get(r);
    if (!v) continue;
    s.times.push_back(r.time);
    s.values.push_back(*v);
  }
  return s;
}

std::optional<double> lookup(const std::vector<std::pair<double, double>>& pairs, double key) {
  for (const auto& [k, v] : pairs)
    if (std::abs(k - key) <= 1e-12 * std::max(1.0, std::abs(key))) return v;
  return std::nullopt;
}

struct WindowStats {
  double mean = 0.0;
  double spread = 0.0;
  double change = 0.0;  // fitted trend across the window
  double max_abs = 0.0;
  double first = 0.0;
  double last = 0.0;
};

WindowStats trailing_window(const TimeSeries& s, const ClassifierSettings& settings) {
  const std::size_t w = window_length(s.size(), settings);
  const std::vector<double> t(s.times.end() - static_cast<std::ptrdiff_t>(w), s.times.end());
  const std::vector<double> v(s.values.end() - static_cast<std::ptrdiff_t>(w), s.values.end());
  WindowStats st;
  st.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(w);
  double ss = 0.0;
  for (double x : v) {
    ss += (x - st.mean) * (x - st.mean);
    st.max_abs = std::max(st.max_abs, std::abs(x));
  }
  st.spread = std::sqrt(ss / static_cast<double>(w));
  st.change = w > 1 ? fit_line(t, v).slope * (t.back() - t.front()) : 0.0;
  st.first = v.front();
  st.last = v.back();
  return st;
}

}  // namespace

std::optional<Estimate> growth_exponent(const TimeSeries& series) {
  series.validate();
  std::vector<double> t;
  std::vector<double> v;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.times[i] <= 0.0) continue;
    if (!(series.values[i] > 0.0)) return std::nullopt;
    t.push_back(series.times[i]);
    v.push_back(series.values[i]);
  }
  if (t.size() < 10 || t.back() < 10.0 * t.front()) return std::nullopt;
  const std::size_t start = t.size() / 2;
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = start; i < t.size(); ++i) {
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(v[i]));
  }
  const LineFit f = fit_line(lx, ly);
  return Estimate{f.slope, 2.0 * f.slope_stderr};
}

std::string_view verdict_name(ConcentrationVerdict v) {
  switch (v) {
    case ConcentrationVerdict::totally_dispersive:
      return "totally-dispersive";
    case ConcentrationVerdict::partially_dispersive:
      return "partially-dispersive";
    case ConcentrationVerdict::non_dispersive:
      return "non-dispersive";
    case ConcentrationVerdict::not_converged:
      break;
  }
  return "not-converged";
}

ConcentrationLimits concentration_limits(const std::vector<DiagnosticsRecord>& records,
                                         const std::vector<double>& R_grid, double total_mass,
                                         const ClassifierSettings& settings) {
  ConcentrationLimits out;
  const double tol = settings.mass_tolerance * total_mass;
  std::vector<double> radii = R_grid;
  std::sort(radii.begin(), radii.end());
  for (double R : radii) {
    const TimeSeries s = extract(records, [R](const DiagnosticsRecord& r) { return lookup(r.concentration, R); });
    if (s.size() != records.size() || s.size() == 0) continue;
    const WindowStats st = trailing_window(s, settings);
    out.radii.push_back(R);
    out.mass_at_radius.push_back({st.mean, st.spread});
    // A trend toward zero that is already below tolerance is settled.
    out.converged.push_back(std::abs(st.change) <= tol || (st.change < 0.0 && st.max_abs <= tol));
  }
  if (out.radii.empty()) return out;

  const std::size_t last = out.radii.size() - 1;
  if (!out.converged[last]) return out;
  Estimate m_inf = out.mass_at_radius[last];
  if (last > 0) {
    if (!out.converged[last - 1]) return out;
    const double diff = std::abs(out.mass_at_radius[last].value - out.mass_at_radius[last - 1].value);
    if (diff > tol) return out;
    m_inf.band = std::max(m_inf.band, diff);
  }
  out.m_infinity = m_inf;
  if (m_inf.value <= tol)
    out.verdict = ConcentrationVerdict::totally_dispersive;
  else if (m_inf.value >= total_mass - tol)
    out.verdict = ConcentrationVerdict::non_dispersive;
  else
    out.verdict = ConcentrationVerdict::partially_dispersive;
  return out;
}

StrongDispersionResult strong_dispersion_test(const std::vector<DiagnosticsRecord>& records, double q,
                                              const ClassifierSettings& settings) {
  if (!(q > 1.0)) throw DomainError("strong_dispersion_test: q must exceed 1");
  StrongDispersionResult out;
  out.q = q;
  const TimeSeries s = extract(records, [q](const DiagnosticsRecord& r) { return lookup(r.lq_norms, q); });
  if (s.size() < 3 || s.size() != records.size() || !(s.values.front() > 0.0)) return out;
  const WindowStats st = trailing_window(s, settings);
  out.final_ratio = s.values.back() / s.values.front();
  out.decreasing = st.change < 0.0 && st.last < st.first;
  out.dispersive = out.decreasing && s.values.back() < settings.strong_fraction * s.values.front();
  out.decay_exponent = growth_exponent(s);
  return out;
}

VirialResult virialization_metric(double energy, const TimeSeries& kinetic, const ClassifierSettings& settings) {
  kinetic.validate();
  VirialResult out;
  if (kinetic.size() == 0) return out;
  out.threshold = settings.virial_fraction * (std::abs(energy) + kinetic.values.front());
  double integral = 0.0;
  const double t0 = kinetic.times.front();
  out.metric.times = kinetic.times;
  out.metric.values.resize(kinetic.size());
  out.metric.values[0] = energy + kinetic.values[0];
  for (std::size_t i = 1; i < kinetic.size(); ++i) {
    const double dt = kinetic.times[i] - kinetic.times[i - 1];
    integral += 0.5 * dt * (2.0 * energy + kinetic.values[i] + kinetic.values[i - 1]);
    out.metric.values[i] = integral / (kinetic.times[i] - t0);
  }
  if (kinetic.size() >= 3) {
    const WindowStats st = trailing_window(out.metric, settings);
    out.virialized = st.max_abs < out.threshold && std::abs(st.last) <= std::abs(st.first) + 1e-15;
  }
  return out;
}

PeriodicityResult detect_periodicity(const TimeSeries& series, const ClassifierSettings& settings) {
  series.validate();
  PeriodicityResult out;
  const std::size_t n = series.size();
  if (n < 16) return out;
  const double dt = series.times[1] - series.times[0];
  for (std::size_t i = 2; i < n; ++i)
    if (std::abs(series.times[i] - series.times[i - 1] - dt) > 1e-6 * dt) return out;

  const double mean = std::accumulate(series.values.begin(), series.values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> x(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = series.values[i] - mean;
    var += x[i] * x[i];
  }
  var /= static_cast<double>(n);
  if (var <= 0.0 || std::sqrt(var) <= settings.flat_tolerance * std::abs(mean)) return out;

  const std::size_t max_lag = 2 * n / 3;
  std::vector<double> acf(max_lag + 1);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += x[i] * x[i + lag];
    acf[lag] = s / static_cast<double>(n - lag) / var;
  }
  const auto is_peak = [&](std::size_t l) { return acf[l] >= acf[l - 1] && acf[l] >= acf[l + 1]; };
  const auto refine = [&](std::size_t l) {
    const double denom = acf[l - 1] - 2.0 * acf[l] + acf[l + 1];
    const double shift = denom != 0.0 ? 0.5 * (acf[l - 1] - acf[l + 1]) / denom : 0.0;
    return (static_cast<double>(l) + shift) * dt;
  };

  std::size_t lag = 1;
  while (lag < max_lag && acf[lag] >= 0.0) ++lag;
  std::size_t first_peak = 0;
  for (; lag < max_lag; ++lag)
    if (acf[lag] > 0.3 && is_peak(lag)) {
      first_peak = lag;
      break;
    }
  if (first_peak == 0) return out;
  const double p1 = refine(first_peak);

  const auto lo = static_cast<std::size_t>(std::floor(1.5 * p1 / dt));
  const auto hi = std::min(max_lag - 1, static_cast<std::size_t>(std::ceil(2.5 * p1 / dt)));
  std::size_t second_peak = 0;
  for (std::size_t l = std::max<std::size_t>(lo, 1); l <= hi; ++l)
    if (is_peak(l) && (second_peak == 0 || acf[l] > acf[second_peak])) second_peak = l;
  if (second_peak == 0 || acf[second_peak] < 0.3) return out;
  const double p2 = refine(second_peak) - p1;

  out.period = p1;
  out.second_period = p2;
  out.periodic = std::abs(p2 - p1) <= settings.period_tolerance * p1;
  return out;
}

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::steady:
      return "steady";
    case Regime::periodic:
      return "periodic";
    case Regime::virialized:
      return "virialized";
    case Regime::partially_dispersive:
      return "partially-dispersive";
    case Regime::totally_dispersive:
      return "totally-dispersive";
    case Regime::strongly_dispersive:
      return "strongly-dispersive";
    case Regime::undetermined:
      break;
  }
  return "undetermined";
}

std::string_view outcome_name(CheckOutcome o) {
  switch (o) {
    case CheckOutcome::pass:
      return "pass";
    case CheckOutcome::fail:
      return "fail";
    case CheckOutcome::not_applicable:
      break;
  }
  return "not-applicable";
}

std::vector<PropositionCheck> check_propositions(double energy, double momentum, double mass,
                                                 const ClassificationReport& report,
                                                 const ClassifierSettings& settings) {
  if (!(mass > 0.0)) throw DomainError("check_propositions: mass must be positive");
  const double threshold = momentum * momentum / (2.0 * mass);
  const bool total = report.label == Regime::totally_dispersive || report.label == Regime::strongly_dispersive;
  const auto verdict = [](bool ok) { return ok ? CheckOutcome::pass : CheckOutcome::fail; };
  std::vector<PropositionCheck> out;

  out.push_back({"total_dispersion_energy_bound", "totally dispersive => E >= |Q|^2/2M",
                 total ? verdict(energy >= threshold) : CheckOutcome::not_applicable});

  PropositionCheck growth{"positive_energy_t2_growth", "E > |Q|^2/2M => <(dx)^2> ~ t^2",
                          CheckOutcome::not_applicable};
  if (energy > threshold && report.growth_exponent)
    growth.outcome = verdict(std::abs(report.growth_exponent->value - 2.0) <= settings.exponent_tolerance);
  out.push_back(growth);

  PropositionCheck epot{"total_dispersion_iff_epot_vanishes", "totally dispersive <=> E_pot(t) -> 0",
                        CheckOutcome::not_applicable};
  if (report.potential_energy_vanishes && report.label != Regime::undetermined)
    epot.outcome = verdict(total == *report.potential_energy_vanishes);
  out.push_back(epot);

  out.push_back({"static_negative_energy", "steady => E < 0",
                 report.label == Regime::steady ? verdict(energy < 0.0) : CheckOutcome::not_applicable});
  out.push_back({"periodic_energy_bound", "periodic => E < -|Q|^2/2M",
                 report.label == Regime::periodic ? verdict(energy < -threshold) : CheckOutcome::not_applicable});

  const bool virialized = report.label == Regime::virialized || (report.virial && report.virial->virialized);
  out.push_back({"virialized_nonpositive_energy", "virialized => E <= 0",
                 virialized ? verdict(energy <= 0.0) : CheckOutcome::not_applicable});

  const bool dispersive = total || report.label == Regime::partially_dispersive;
  out.push_back({"dispersion_implies_statistical", "partially or totally dispersive => statistically dispersive",
                 dispersive ? verdict(report.statistically_dispersive) : CheckOutcome::not_applicable});
  return out;
}

ClassificationReport classify(const std::vector<DiagnosticsRecord>& records, double energy, double momentum,
                              double mass, const ClassifierSettings& settings) {
  ClassificationReport rep;
  rep.threshold.energy = energy;
  rep.threshold.threshold = momentum * momentum / (2.0 * mass);
  rep.threshold.rest_frame_energy = energy - rep.threshold.threshold;
  // too short to test any limit
  if (records.size() < kMinimumRecords) {
    rep.consistency = check_propositions(energy, momentum, mass, rep, settings);
    return rep;
  }

  const TimeSeries variance = extract(records, [](const DiagnosticsRecord& r) { return std::optional(r.variance); });
  variance.validate();
  rep.growth_exponent = growth_exponent(variance);

  if (variance.size() >= 3 && variance.values.front() > 0.0) {
    const double peak = *std::max_element(variance.values.begin(), variance.values.end());
    const WindowStats st = trailing_window(variance, settings);
    rep.statistically_dispersive =
        peak > settings.statistical_factor * variance.values.front() && st.change > 0.0;
  }

  std::vector<double> radii;
  for (const auto& [R, m] : records.front().concentration) radii.push_back(R);
  rep.concentration = concentration_limits(records, radii, mass, settings);
  rep.m_infinity = rep.concentration.m_infinity;

  bool strong = false;
  for (const auto& [q, value] : records.front().lq_norms) {
    if (!(q > 1.0)) continue;
    rep.strong.push_back(strong_dispersion_test(records, q, settings));
    strong = strong || rep.strong.back().dispersive;
  }

  const TimeSeries kinetic = extract(records, [](const DiagnosticsRecord& r) { return r.energy_kinetic; });
  if (kinetic.size() == records.size()) rep.virial = virialization_metric(energy, kinetic, settings);

  const TimeSeries potential = extract(records, [](const DiagnosticsRecord& r) { return r.energy_potential; });
  if (potential.size() == records.size() && potential.size() >= 3 && potential.values.front() > 0.0) {
    const auto decay = growth_exponent(potential);
    rep.potential_energy_vanishes =
        potential.values.back() < settings.strong_fraction * potential.values.front() ||
        (decay && decay->value <= -0.5);
  }

  rep.periodicity = detect_periodicity(variance, settings);

  const auto relative_spread = [](const TimeSeries& s) {
    const double ref = s.values.front();
    double worst = 0.0;
    for (double v : s.values) worst = std::max(worst, std::abs(v - ref));
    return ref != 0.0 ? worst / std::abs(ref) : worst;
  };
  rep.flat = relative_spread(variance) <= settings.flat_tolerance &&
             (kinetic.size() != records.size() || relative_spread(kinetic) <= settings.flat_tolerance);

  const auto& last = records.back();
  const auto rho53 = lookup(last.lq_norms, 5.0 / 3.0);
  if (rho53 && last.conformal_moment && *last.conformal_moment > 0.0 && last.time > 0.0)
    rep.interpolation_ratio = std::pow(*rho53, 5.0 / 3.0) * last.time * last.time / *last.conformal_moment;

  const auto verdict = rep.concentration.verdict;
  const bool stat = rep.statistically_dispersive;
  if (strong && verdict == ConcentrationVerdict::totally_dispersive && stat)
    rep.label = Regime::strongly_dispersive;
  else if (verdict == ConcentrationVerdict::totally_dispersive && stat)
    rep.label = Regime::totally_dispersive;
  else if (verdict == ConcentrationVerdict::partially_dispersive && stat)
    rep.label = Regime::partially_dispersive;
  else if (rep.periodicity.periodic)
    rep.label = Regime::periodic;
  else if (rep.flat)
    rep.label = Regime::steady;
  else if (rep.virial && rep.virial->virialized)
    rep.label = Regime::virialized;
  else
    rep.label = Regime::undetermined;

  rep.consistency = check_propositions(energy, momentum, mass, rep, settings);
  return rep;
}

}  // namespace vpdisp
