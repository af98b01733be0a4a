#include "haptic/psychophysics/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "haptic/core/error.hpp"

namespace haptic::psychophysics {
namespace {

constexpr double kSamePressure = 1e-9;

bool same_pressure(double a, double b) { return std::abs(a - b) <= kSamePressure; }

}  // namespace

std::vector<DataPoint> tally(const ResponseLedger& ledger) {
  if (!ledger.complete()) {
    throw Error(ErrorCode::incomplete_ledger,
                "ledger has " + std::to_string(ledger.answered()) + " of " +
                    std::to_string(ledger.schedule().size()) + " responses");
  }
  struct Count {
    int chosen = 0;
    int total = 0;
  };
  std::map<double, Count> counts;
  for (const Trial& t : ledger.schedule().trials()) {
    if (t.kind != TrialKind::test) continue;
    const bool chose_second = *ledger.response(t.id);
    Count& c = counts[t.test_pressure().psi()];
    c.total += 1;
    if (chose_second == t.test_is_second) c.chosen += 1;
  }
  std::vector<DataPoint> out;
  out.reserve(counts.size());
  for (const auto& [p, c] : counts) {
    out.push_back(DataPoint{Pressure::psi(p), 100.0 * c.chosen / c.total, c.total});
  }
  return out;
}

double psychometric_percent(double pressure_psi, double reference_psi, double k) noexcept {
  return 100.0 / (1.0 + std::exp(-k * (pressure_psi - reference_psi)));
}

double sum_squared_residual(std::span<const DataPoint> points, Pressure reference, double k) {
  double ssr = 0.0;
  for (const DataPoint& pt : points) {
    const double r = pt.q_percent - psychometric_percent(pt.pressure.psi(), reference.psi(), k);
    ssr += r * r;
  }
  return ssr;
}

PsychometricFit fit_sigmoid(std::span<const DataPoint> points, Pressure reference,
                            const FitOptions& options) {
  if (!(options.k_min > 0.0 && options.k_max > options.k_min) || options.bracket_samples < 3) {
    throw Error(ErrorCode::invalid_argument, "invalid fit search interval");
  }
  bool off_reference = false;
  std::vector<double> distinct;
  for (const DataPoint& pt : points) {
    if (!(pt.q_percent >= 0.0 && pt.q_percent <= 100.0)) {
      throw Error(ErrorCode::out_of_range, "observed percentage outside [0, 100]");
    }
    if (!same_pressure(pt.pressure.psi(), reference.psi())) off_reference = true;
    if (std::none_of(distinct.begin(), distinct.end(),
                     [&](double d) { return same_pressure(d, pt.pressure.psi()); })) {
      distinct.push_back(pt.pressure.psi());
    }
  }
  if (!off_reference || distinct.size() < 2) {
    throw Error(ErrorCode::no_information,
                "fit needs at least two distinct pressures including one off the reference");
  }

  auto ssr = [&](double k) { return sum_squared_residual(points, reference, k); };

  // Coarse log-spaced scan picks the basin; golden section refines inside it.
  const int n = options.bracket_samples;
  const double log_lo = std::log(options.k_min);
  const double log_step = (std::log(options.k_max) - log_lo) / (n - 1);
  auto grid_k = [&](int i) {
    if (i == 0) return options.k_min;
    if (i == n - 1) return options.k_max;
    return std::exp(log_lo + log_step * i);
  };
  int best = 0;
  double best_ssr = ssr(grid_k(0));
  for (int i = 1; i < n; ++i) {
    const double v = ssr(grid_k(i));
    if (v < best_ssr) {
      best_ssr = v;
      best = i;
    }
  }
  const double lo = grid_k(std::max(best - 1, 0));
  const double hi = grid_k(std::min(best + 1, n - 1));
  double k = golden_section_minimize(ssr, lo, hi, options.tolerance);

  PsychometricFit fit;
  fit.reference = reference;
  fit.points.assign(points.begin(), points.end());

  // Separable data makes the residual monotone, so the best k sits on a bound.
  if (best == 0 || best == n - 1) {
    const double bound = best == 0 ? options.k_min : options.k_max;
    if (ssr(bound) <= ssr(k)) {
      k = bound;
      fit.saturated = true;
    }
  }
  fit.k = k;
  fit.residual = ssr(k);
  return fit;
}

JndReport jnd_from_k(double k, Pressure reference) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw Error(ErrorCode::non_positive_k, "JND needs a positive steepness, got " +
                                               std::to_string(k));
  }
  if (!(reference.psi() > 0.0)) {
    throw Error(ErrorCode::out_of_range, "reference pressure must be positive");
  }
  // Solving 75 = 100 / (1 + exp(-k d)) gives d = -ln(100/75 - 1) / k = ln 3 / k.
  const double step = std::log(3.0) / k;
  JndReport r;
  r.jnd = Pressure::psi(step);
  r.p75 = Pressure::psi(reference.psi() + step);
  r.weber_fraction = 100.0 * step / reference.psi();
  return r;
}

JndReport jnd(const PsychometricFit& fit) { return jnd_from_k(fit.k, fit.reference); }

BiasReport bias_report(std::span<const ResponseLedger> ledgers) {
  int probes = 0;
  int second = 0;
  for (const ResponseLedger& ledger : ledgers) {
    for (const Trial& t : ledger.schedule().trials()) {
      if (t.kind != TrialKind::bias_probe) continue;
      auto answer = ledger.response(t.id);
      if (!answer) continue;
      ++probes;
      if (*answer) ++second;
    }
  }
  if (probes == 0) throw Error(ErrorCode::no_bias_probes, "no answered bias probes");
  BiasReport r;
  r.probes = probes;
  r.second_pct = 100.0 * second / probes;
  r.first_pct = 100.0 - r.second_pct;
  return r;
}

BiasReport bias_report(const ResponseLedger& ledger) {
  return bias_report(std::span<const ResponseLedger>(&ledger, 1));
}

}  // namespace haptic::psychophysics
