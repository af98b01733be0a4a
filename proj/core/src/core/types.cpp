#include "haptic/core/types.hpp"

#include <algorithm>
#include <cmath>

#include "haptic/core/error.hpp"

namespace haptic {

UncertaintyLevel UncertaintyLevel::clamp(double x) {
  if (std::isnan(x)) {
    throw Error(ErrorCode::invalid_argument, "uncertainty is NaN");
  }
  return UncertaintyLevel(std::clamp(x, 0.0, 1.0));
}

Pose::Pose(Vec2 position, double path_parameter) : position_(position), s_(path_parameter) {
  if (!std::isfinite(position.x) || !std::isfinite(position.y)) {
    throw Error(ErrorCode::invalid_argument, "pose position must be finite");
  }
  if (!(path_parameter >= 0.0 && path_parameter <= 1.0)) {
    throw Error(ErrorCode::out_of_range, "path parameter outside [0, 1]");
  }
}

}  // namespace haptic
