#pragma once

#include <span>
#include <string>
#include <vector>

#include "haptic/core/units.hpp"
#include "haptic/psychophysics/schedule.hpp"

namespace haptic::psychophysics {

/// Observed choice rate at one test pressure.
struct DataPoint {
  Pressure pressure;
  double q_percent = 0.0;  ///< % of trials where the test was judged higher
  int trials = 0;
};

/// Per test pressure, the percentage of trials where the test pressure was
/// judged higher. Bias probes are ignored. Requires a complete ledger.
std::vector<DataPoint> tally(const ResponseLedger& ledger);

/// Logistic psychometric curve in percent, pinned at 50 % at the reference.
double psychometric_percent(double pressure_psi, double reference_psi, double k) noexcept;

/// Unweighted sum of squared percentage residuals for a given steepness.
double sum_squared_residual(std::span<const DataPoint> points, Pressure reference, double k);

struct FitOptions {
  double k_min = 0.01;
  double k_max = 100.0;
  /// Log-spaced coarse scan used to bracket the global minimum before the
  /// golden-section refinement.
  int bracket_samples = 400;
  double tolerance = 1e-10;
};

struct PsychometricFit {
  double k = 0.0;
  Pressure reference;
  double residual = 0.0;
  std::vector<DataPoint> points;
  /// Set when the minimiser ran into a bound of the search interval, which
  /// happens for perfectly separated data.
  bool saturated = false;

  double model_percent(Pressure p) const noexcept {
    return psychometric_percent(p.psi(), reference.psi(), k);
  }
};

/// Least-squares steepness with the reference fixed. Throws
/// `no_information` when no point lies off the reference or fewer than two
/// distinct pressures are present.
PsychometricFit fit_sigmoid(std::span<const DataPoint> points, Pressure reference,
                            const FitOptions& options = {});

/// Minimises a unimodal function on [lo, hi] by golden-section search.
template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tolerance) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tolerance) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

struct JndReport {
  Pressure jnd;
  Pressure p75;
  double weber_fraction = 0.0;  ///< percent of the reference
};

/// Pressure step from the reference to the 75 % point: ln(3) / k.
JndReport jnd(const PsychometricFit& fit);
JndReport jnd_from_k(double k, Pressure reference);

struct BiasReport {
  double first_pct = 0.0;
  double second_pct = 0.0;
  int probes = 0;
};

/// Interval preference over reference-vs-reference probes only.
BiasReport bias_report(const ResponseLedger& ledger);
BiasReport bias_report(std::span<const ResponseLedger> ledgers);

}  // namespace haptic::psychophysics
