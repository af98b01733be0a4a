#include "haptic/plant/plant.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "haptic/core/error.hpp"
#include "haptic/core/format.hpp"

namespace haptic::plant {

PlantParams PlantParams::defaults() {
  return calibrate(RiseTarget{Pressure::psi(1.5), 0.95, 0.86});
}

void PlantParams::validate() const {
  if (!(tau_fill > 0.0) || !(tau_vent > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "plant time constants must be positive");
  }
  if (!(sensor_noise_sd >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "sensor noise sd must be non-negative");
  }
  if (!(leak_rate >= 0.0)) throw Error(ErrorCode::invalid_argument, "negative leak rate");
}

PlantState step(const PlantState& state, ValveState valves, double dt, const PlantParams& params) {
  if (!(dt > 0.0 && dt <= 0.1)) {
    throw Error(ErrorCode::out_of_range, "plant step dt must be in (0, 0.1] s");
  }
  if (!valves.interlock_ok()) {
    throw Error(ErrorCode::interlock_violation, "fill and vent valves both open");
  }

  PlantState next = state;
  next.time = state.time + dt;
  const double p = state.pressure.psi();
  const double threshold = params.rupture_threshold.psi();

  if (state.ruptured || p > threshold) {
    double q = valves.vent_open ? p * std::exp(-dt / params.tau_vent) : p;
    q = std::max(0.0, std::min(q, p) - params.leak_rate * dt);
    next.pressure = Pressure::psi(q);
    if (!state.ruptured) {
      next.ruptured = true;
      next.rupture_time = state.time;
    }
    return next;
  }

  double q = p;
  if (valves.fill_open) {
    const double sp = state.regulator_setpoint.psi();
    q = sp + (p - sp) * std::exp(-dt / params.tau_fill);
    if (q > threshold) {
      const double t_cross = fill_time(p, sp, threshold, params.tau_fill);
      next.ruptured = true;
      next.rupture_time = state.time + t_cross;
      q = std::max(0.0, threshold - params.leak_rate * (dt - t_cross));
    }
  } else if (valves.vent_open) {
    q = p * std::exp(-dt / params.tau_vent);
  }
  next.pressure = Pressure::psi(q);
  return next;
}

PressureSample read_sensor(const PlantState& state, const PlantParams& params, Rng& noise) {
  const double raw = noise.normal(state.pressure.psi(), params.sensor_noise_sd);
  return PressureSample{state.time, Pressure::psi(std::max(0.0, raw))};
}

PlantParams calibrate(const RiseTarget& target) {
  if (!(target.fraction > 0.0 && target.fraction < 1.0)) {
    throw Error(ErrorCode::out_of_range, "rise fraction must be in (0, 1)");
  }
  if (!(target.time > 0.0)) throw Error(ErrorCode::out_of_range, "rise time must be positive");
  PlantParams params;
  params.tau_fill = target.time / std::log(1.0 / (1.0 - target.fraction));
  params.tau_vent = params.tau_fill;
  return params;
}

double fill_time(double from, double regulator, double level, double tau_fill) {
  // p(t) = sp + (p0 - sp) e^{-t/tau}  =>  t = tau ln((sp - p0) / (sp - level))
  return tau_fill * std::log((regulator - from) / (regulator - level));
}

Plant::Plant(PlantParams params, PlantState initial, Rng sensor_noise)
    : params_(params), state_(initial), noise_(std::move(sensor_noise)) {
  params_.validate();
  if (!(state_.pressure.psi() >= 0.0)) {
    throw Error(ErrorCode::out_of_range, "initial gauge pressure below zero");
  }
}

const PlantState& Plant::advance(ValveState valves, double dt) {
  state_ = step(state_, valves, dt, params_);
  return state_;
}

PressureSample Plant::read() { return read_sensor(state_, params_, noise_); }

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
  out << "time_s,true_psi,measured_psi,fill,vent,ruptured\n";
  for (const TraceRow& r : rows) {
    out << format_double(r.time) << ',' << format_double(r.true_psi) << ','
        << format_double(r.measured_psi) << ',' << (r.valves.fill_open ? 1 : 0) << ','
        << (r.valves.vent_open ? 1 : 0) << ',' << (r.ruptured ? 1 : 0) << '\n';
  }
}

}  // namespace haptic::plant
