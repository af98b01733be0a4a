#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "haptic/psychophysics/fit.hpp"

namespace haptic::psychophysics {

struct CohortRow {
  std::string label;
  double k = 0.0;
  double jnd_psi = 0.0;
  double weber_pct = 0.0;
};

/// Per-subject rows plus summary rows. `mean` and `stdev` are plain
/// arithmetic statistics over the subject rows (sample standard deviation,
/// zero for a single subject); `pooled` refits one curve to every subject's
/// points together and is absent when the fits carry no points.
struct CohortSummary {
  std::vector<CohortRow> rows;
  CohortRow mean;
  CohortRow stdev;
  std::optional<CohortRow> pooled;
  std::optional<PsychometricFit> pooled_fit;
};

CohortSummary aggregate(std::span<const PsychometricFit> fits, Pressure reference,
                        std::span<const std::string> labels = {});

}  // namespace haptic::psychophysics
