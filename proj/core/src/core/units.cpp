#include "haptic/core/units.hpp"

#include <cmath>
#include <string>

#include "haptic/core/error.hpp"

namespace haptic {

Pressure Pressure::psi(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::invalid_argument, "pressure must be finite");
  }
  return Pressure(value);
}

Pressure Pressure::kpa(double value) { return Pressure::psi(kpa_to_psi(value)); }

double psi_to_kpa(Pressure p) noexcept { return p.psi() * kKpaPerPsi; }

double kpa_to_psi(double kpa) {
  if (!std::isfinite(kpa)) {
    throw Error(ErrorCode::invalid_argument, "pressure must be finite");
  }
  return kpa / kKpaPerPsi;
}

namespace literals {
Pressure operator""_psi(long double v) { return Pressure::psi(static_cast<double>(v)); }
Pressure operator""_psi(unsigned long long v) { return Pressure::psi(static_cast<double>(v)); }
}  // namespace literals

}  // namespace haptic
