#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "haptic/core/types.hpp"
#include "haptic/core/units.hpp"
#include "haptic/plant/plant.hpp"

namespace haptic::session {

enum class Phase { idle, demo1, demo2, retraining, done, trial, fault };

std::string_view to_string(Phase phase) noexcept;
std::optional<Phase> phase_from_string(std::string_view s) noexcept;

/// One control tick of the feedback loop.
struct SessionFrame {
  double t = 0.0;
  Pose pose;
  UncertaintyLevel uncertainty;
  Pressure setpoint;
  Pressure measured;
  Pressure true_pressure;
  plant::ValveState valves;
  Phase phase = Phase::idle;
  std::optional<std::string> fault;
};

/// `t,x,y,s,u,setpoint_psi,measured_psi,true_psi,fill,vent,phase`
void write_frames_csv(std::ostream& out, std::span<const SessionFrame> frames);

}  // namespace haptic::session
