#pragma once

#include <compare>

namespace haptic {

inline constexpr double kKpaPerPsi = 6.89476;

/// Upper limit of the display's operating envelope. Anything above it tears
/// the seals.
inline constexpr double kRupturePsi = 3.5;

/// Gauge pressure in psi. Construction rejects NaN and infinities; range
/// checks belong to whoever consumes the value (the plant, the schedule).
class Pressure {
 public:
  constexpr Pressure() = default;

  static Pressure psi(double value);
  static Pressure kpa(double value);

  constexpr double psi() const noexcept { return psi_; }
  double kpa() const noexcept { return psi_ * kKpaPerPsi; }

  /// True for pressures the display can hold without rupturing.
  constexpr bool in_display_range() const noexcept {
    return psi_ >= 0.0 && psi_ <= kRupturePsi;
  }

  friend constexpr auto operator<=>(const Pressure&, const Pressure&) = default;

 private:
  explicit constexpr Pressure(double v) : psi_(v) {}
  double psi_ = 0.0;
};

double psi_to_kpa(Pressure p) noexcept;
double kpa_to_psi(double kpa);

namespace literals {
Pressure operator""_psi(long double v);
Pressure operator""_psi(unsigned long long v);
}  // namespace literals

}  // namespace haptic
