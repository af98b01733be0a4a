#include "haptic/control/controller.hpp"

#include <algorithm>
#include <cmath>

#include "haptic/core/error.hpp"

namespace haptic::control {

void RenderingLaw::validate() const {
  if (!(p_min.psi() > 0.0 && p_min < p_max && p_max.psi() <= kRupturePsi)) {
    throw Error(ErrorCode::invalid_argument, "rendering law needs 0 < p_min < p_max <= 3.5 psi");
  }
}

void ControllerConfig::validate() const {
  if (!(deadband > 0.0)) throw Error(ErrorCode::invalid_argument, "deadband must be positive");
  if (!(safety_clamp.psi() > 0.0 && safety_clamp.psi() <= kRupturePsi)) {
    throw Error(ErrorCode::invalid_argument, "safety clamp must be in (0, 3.5] psi");
  }
  if (!(tick > 0.0 && tick <= 0.1)) {
    throw Error(ErrorCode::invalid_argument, "control tick must be in (0, 0.1] s");
  }
}

Pressure uncertainty_to_setpoint(UncertaintyLevel u, const RenderingLaw& law,
                                 Pressure safety_clamp) {
  const double span = law.p_max.psi() - law.p_min.psi();
  const double sp = law.p_min.psi() + span * u.value();
  return Pressure::psi(std::min(sp, safety_clamp.psi()));
}

plant::ValveState valve_command(Pressure measured, Pressure setpoint, const ControllerConfig& cfg) {
  if (measured.psi() < setpoint.psi() - cfg.deadband) return {true, false};
  if (measured.psi() > setpoint.psi() + cfg.deadband) return {false, true};
  return {false, false};
}

TrackSample control_tick(plant::Plant& plant, Pressure setpoint, const ControllerConfig& cfg) {
  const Pressure target = std::min(setpoint, cfg.safety_clamp);
  const plant::PressureSample reading = plant.read();
  TrackSample s;
  s.t = plant.state().time;
  s.setpoint = target;
  s.measured = reading.measured;
  s.true_pressure = plant.state().pressure;
  s.valves = valve_command(reading.measured, target, cfg);
  plant.set_regulator(regulator_pressure(cfg));
  s.ruptured = plant.advance(s.valves, cfg.tick).ruptured;
  return s;
}

TrackResult track(plant::Plant& plant, Pressure setpoint, double duration,
                  const ControllerConfig& cfg) {
  if (!(duration > 0.0)) throw Error(ErrorCode::out_of_range, "duration must be positive");
  cfg.validate();
  TrackResult out;
  const auto ticks = static_cast<long>(std::llround(duration / cfg.tick));
  out.samples.reserve(static_cast<std::size_t>(ticks));
  for (long i = 0; i < ticks; ++i) {
    out.samples.push_back(control_tick(plant, setpoint, cfg));
    if (out.samples.back().ruptured && !out.fault) {
      out.fault = "display ruptured at t=" + std::to_string(*plant.state().rupture_time) + " s";
    }
  }
  return out;
}

std::vector<plant::TraceRow> to_trace_rows(const std::vector<TrackSample>& samples) {
  std::vector<plant::TraceRow> rows;
  rows.reserve(samples.size());
  for (const TrackSample& s : samples) {
    rows.push_back(plant::TraceRow{s.t, s.true_pressure.psi(), s.measured.psi(), s.valves,
                                   s.ruptured});
  }
  return rows;
}

ControlSettings control_settings_from_json(const nlohmann::json& j) {
  ControlSettings s;
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) {
      throw Error(ErrorCode::parse_error, std::string("config key '") + key + "' is not a number");
    }
    return j.at(key).get<double>();
  };
  s.law.p_min = Pressure::psi(num("p_min_psi", s.law.p_min.psi()));
  s.law.p_max = Pressure::psi(num("p_max_psi", s.law.p_max.psi()));
  s.config.deadband = num("deadband_psi", s.config.deadband);
  s.config.safety_clamp = Pressure::psi(num("safety_clamp_psi", s.config.safety_clamp.psi()));
  s.config.tick = num("tick_s", s.config.tick);
  s.law.validate();
  s.config.validate();
  return s;
}

nlohmann::json to_json(const ControlSettings& s) {
  return {{"p_min_psi", s.law.p_min.psi()},
          {"p_max_psi", s.law.p_max.psi()},
          {"deadband_psi", s.config.deadband},
          {"safety_clamp_psi", s.config.safety_clamp.psi()},
          {"tick_s", s.config.tick}};
}

}  // namespace haptic::control
