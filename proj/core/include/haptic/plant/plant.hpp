#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "haptic/core/random.hpp"
#include "haptic/core/units.hpp"

namespace haptic::plant {

/// Fill valve connects the regulator to the display; vent valve opens it to
/// atmosphere. Never both at once.
struct ValveState {
  bool fill_open = false;
  bool vent_open = false;

  constexpr bool interlock_ok() const noexcept { return !(fill_open && vent_open); }
  friend constexpr bool operator==(ValveState, ValveState) = default;
};

/// Documented defaults: 95 % of setpoint reached in 0.86 s, symmetric vent,
/// 0.01 psi sensor noise, 0.5 psi/s leak once the seals tear at 3.5 psi.
struct PlantParams {
  double tau_fill = 0.0;  ///< s
  double tau_vent = 0.0;  ///< s
  double sensor_noise_sd = 0.01;  ///< psi
  Pressure rupture_threshold = Pressure::psi(kRupturePsi);
  double leak_rate = 0.5;  ///< psi/s after rupture

  static PlantParams defaults();
  void validate() const;
};

struct PlantState {
  Pressure pressure;
  Pressure regulator_setpoint;
  bool ruptured = false;
  double time = 0.0;
  std::optional<double> rupture_time;
};

/// Advances the display by `dt` using the exact first-order solution over
/// the step, so results do not depend on step size. Crossing the rupture
/// threshold latches `ruptured` at the interpolated crossing time; from then
/// on the display only loses pressure.
PlantState step(const PlantState& state, ValveState valves, double dt, const PlantParams& params);

struct PressureSample {
  double time = 0.0;
  Pressure measured;
};

/// True pressure plus Gaussian noise, clamped at gauge zero.
PressureSample read_sensor(const PlantState& state, const PlantParams& params, Rng& noise);

struct RiseTarget {
  Pressure setpoint;
  double fraction = 0.95;
  double time = 0.86;
};

/// Fill time constant that reaches `fraction` of the setpoint in `time`;
/// tau_vent mirrors it and the remaining fields keep their defaults.
PlantParams calibrate(const RiseTarget& target);

/// Time for a fill from `from` toward `regulator` to reach `level`.
double fill_time(double from, double regulator, double level, double tau_fill);

/// A plant instance with its own sensor noise stream. Owned by one loop.
class Plant {
 public:
  Plant(PlantParams params, PlantState initial, Rng sensor_noise);

  const PlantState& state() const noexcept { return state_; }
  const PlantParams& params() const noexcept { return params_; }

  void set_regulator(Pressure p) { state_.regulator_setpoint = p; }
  const PlantState& advance(ValveState valves, double dt);
  PressureSample read();

 private:
  PlantParams params_;
  PlantState state_;
  Rng noise_;
};

struct TraceRow {
  double time = 0.0;
  double true_psi = 0.0;
  double measured_psi = 0.0;
  ValveState valves;
  bool ruptured = false;
};

/// `time_s,true_psi,measured_psi,fill,vent,ruptured`
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);

}  // namespace haptic::plant
