#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "haptic/psychophysics/cohort.hpp"
#include "haptic/psychophysics/fit.hpp"
#include "haptic/psychophysics/schedule.hpp"

namespace haptic::psychophysics {

inline constexpr const char* kResponseCsvHeader = "trial_id,first_psi,second_psi,chose_second";

/// Writes `trial_id,first_psi,second_psi,chose_second`, one row per trial.
/// Unanswered trials are skipped.
void write_response_csv(std::ostream& out, const ResponseLedger& ledger);

/// Parses a response CSV. Rows pairing the reference with itself become
/// bias probes; every other row must contain the reference in exactly one
/// interval. Errors carry the 1-based line number.
ResponseLedger read_response_csv(std::istream& in, Pressure reference);
ResponseLedger read_response_csv_file(const std::string& path, Pressure reference);

/// `{subject, k, jnd_psi, p75_psi, weber_pct, residual, saturated}`
nlohmann::json fit_report_json(const std::string& subject, const PsychometricFit& fit);

/// Samples of the fitted curve, `pressure_psi,q_model_pct`, every `step` psi
/// across [lo, hi].
void write_curve_csv(std::ostream& out, const PsychometricFit& fit, double lo, double hi,
                     double step = 0.005);
void write_points_csv(std::ostream& out, const PsychometricFit& fit);

/// Raw points and fitted curves for a cohort: subjects in grey, pooled fit
/// highlighted.
std::string render_cohort_svg(std::span<const PsychometricFit> subjects,
                              const PsychometricFit& pooled, double lo, double hi,
                              double step = 0.005);

}  // namespace haptic::psychophysics
