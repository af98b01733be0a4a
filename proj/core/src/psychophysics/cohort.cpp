#include "haptic/psychophysics/cohort.hpp"

#include <cmath>

#include "haptic/core/error.hpp"

namespace haptic::psychophysics {
namespace {

CohortRow row_for(std::string label, const PsychometricFit& fit) {
  const JndReport r = jnd(fit);
  return CohortRow{std::move(label), fit.k, r.jnd.psi(), r.weber_fraction};
}

}  // namespace

CohortSummary aggregate(std::span<const PsychometricFit> fits, Pressure reference,
                        std::span<const std::string> labels) {
  if (fits.empty()) throw Error(ErrorCode::invalid_argument, "empty cohort");
  if (!labels.empty() && labels.size() != fits.size()) {
    throw Error(ErrorCode::invalid_argument, "one label per fit required");
  }

  CohortSummary out;
  out.rows.reserve(fits.size());
  for (std::size_t i = 0; i < fits.size(); ++i) {
    out.rows.push_back(row_for(labels.empty() ? std::to_string(i + 1) : labels[i], fits[i]));
  }

  const double n = static_cast<double>(out.rows.size());
  out.mean.label = "Mean";
  for (const CohortRow& r : out.rows) {
    out.mean.k += r.k / n;
    out.mean.jnd_psi += r.jnd_psi / n;
    out.mean.weber_pct += r.weber_pct / n;
  }
  out.stdev.label = "St Dev";
  if (out.rows.size() > 1) {
    for (const CohortRow& r : out.rows) {
      out.stdev.k += (r.k - out.mean.k) * (r.k - out.mean.k);
      out.stdev.jnd_psi += (r.jnd_psi - out.mean.jnd_psi) * (r.jnd_psi - out.mean.jnd_psi);
      out.stdev.weber_pct +=
          (r.weber_pct - out.mean.weber_pct) * (r.weber_pct - out.mean.weber_pct);
    }
    out.stdev.k = std::sqrt(out.stdev.k / (n - 1));
    out.stdev.jnd_psi = std::sqrt(out.stdev.jnd_psi / (n - 1));
    out.stdev.weber_pct = std::sqrt(out.stdev.weber_pct / (n - 1));
  }

  std::vector<DataPoint> all;
  for (const PsychometricFit& f : fits) all.insert(all.end(), f.points.begin(), f.points.end());
  if (!all.empty()) {
    out.pooled_fit = fit_sigmoid(all, reference);
    out.pooled = row_for("Overall", *out.pooled_fit);
  }
  return out;
}

}  // namespace haptic::psychophysics
