#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "haptic/core/types.hpp"
#include "haptic/core/units.hpp"
#include "haptic/plant/plant.hpp"

namespace haptic::control {

/// Linear map from uncertainty to display pressure: 0 % renders p_min
/// (deflated), 100 % renders p_max (inflated).
struct RenderingLaw {
  Pressure p_min = Pressure::psi(1.0);
  Pressure p_max = Pressure::psi(3.0);

  void validate() const;
};

struct ControllerConfig {
  double deadband = 0.05;  ///< psi, half-width of the no-actuation band
  Pressure safety_clamp = Pressure::psi(3.0);
  double tick = 0.01;  ///< s

  void validate() const;
};

/// p_min + (p_max - p_min) u, then limited to the safety clamp.
Pressure uncertainty_to_setpoint(UncertaintyLevel u, const RenderingLaw& law,
                                 Pressure safety_clamp = Pressure::psi(3.0));

/// Bang-bang command with a deadband around the setpoint.
plant::ValveState valve_command(Pressure measured, Pressure setpoint, const ControllerConfig& cfg);

/// Supply pressure behind the fill valve. The regulator sits at the safety
/// clamp so the display can never be driven past it, and the valves do the
/// tracking.
inline Pressure regulator_pressure(const ControllerConfig& cfg) { return cfg.safety_clamp; }

struct TrackSample {
  double t = 0.0;
  Pressure setpoint;
  Pressure measured;
  Pressure true_pressure;
  plant::ValveState valves;
  bool ruptured = false;
};

/// One control tick: read the sensor, command the valves, hold them for
/// `cfg.tick`. The sample describes the state at the start of the tick and
/// the command applied during it.
TrackSample control_tick(plant::Plant& plant, Pressure setpoint, const ControllerConfig& cfg);

struct TrackResult {
  std::vector<TrackSample> samples;
  std::optional<std::string> fault;  ///< set when the display ruptured
};

/// Closed-loop tracking of a fixed setpoint for `duration` seconds.
TrackResult track(plant::Plant& plant, Pressure setpoint, double duration,
                  const ControllerConfig& cfg);

std::vector<plant::TraceRow> to_trace_rows(const std::vector<TrackSample>& samples);

/// `{p_min_psi, p_max_psi, deadband_psi, safety_clamp_psi, tick_s}`; missing
/// keys keep their defaults.
struct ControlSettings {
  RenderingLaw law;
  ControllerConfig config;
};
ControlSettings control_settings_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ControlSettings& s);

}  // namespace haptic::control
