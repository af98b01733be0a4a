#include "haptic/session/frame.hpp"

#include <array>
#include <ostream>

#include "haptic/core/format.hpp"

namespace haptic::session {
namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 7> kPhaseNames{{
    {Phase::idle, "idle"},
    {Phase::demo1, "demo1"},
    {Phase::demo2, "demo2"},
    {Phase::retraining, "retraining"},
    {Phase::done, "done"},
    {Phase::trial, "trial"},
    {Phase::fault, "fault"},
}};

}  // namespace

std::string_view to_string(Phase phase) noexcept {
  for (const auto& [p, name] : kPhaseNames) {
    if (p == phase) return name;
  }
  return "unknown";
}

std::optional<Phase> phase_from_string(std::string_view s) noexcept {
  for (const auto& [p, name] : kPhaseNames) {
    if (name == s) return p;
  }
  return std::nullopt;
}

void write_frames_csv(std::ostream& out, std::span<const SessionFrame> frames) {
  out << "t,x,y,s,u,setpoint_psi,measured_psi,true_psi,fill,vent,phase\n";
  for (const SessionFrame& f : frames) {
    out << format_double(f.t) << ',' << format_double(f.pose.position().x) << ','
        << format_double(f.pose.position().y) << ',' << format_double(f.pose.path_parameter())
        << ',' << format_double(f.uncertainty.value()) << ',' << format_double(f.setpoint.psi())
        << ',' << format_double(f.measured.psi()) << ',' << format_double(f.true_pressure.psi())
        << ',' << (f.valves.fill_open ? 1 : 0) << ',' << (f.valves.vent_open ? 1 : 0) << ','
        << to_string(f.phase) << '\n';
  }
}

}  // namespace haptic::session
