#include "haptic/session/loop.hpp"

#include <cmath>
#include <string>

#include "haptic/core/error.hpp"

namespace haptic::session {

int LoopTiming::ticks_per_pose(const control::ControllerConfig& cfg) const {
  if (!(pose_rate_hz > 0.0)) throw Error(ErrorCode::invalid_argument, "pose rate must be positive");
  const long n = std::lround(1.0 / (pose_rate_hz * cfg.tick));
  if (n < 1) throw Error(ErrorCode::invalid_argument, "pose rate faster than the control rate");
  return static_cast<int>(n);
}

FeedbackLoop::FeedbackLoop(const learner::Ensemble& ensemble, plant::Plant& plant,
                           control::ControlSettings control, LoopTiming timing)
    : ensemble_(&ensemble), plant_(&plant), control_(std::move(control)), timing_(timing) {
  control_.law.validate();
  control_.config.validate();
}

void FeedbackLoop::on_pose(const Pose& pose, Phase phase, std::vector<SessionFrame>& out) {
  const UncertaintyLevel u = ensemble_->uncertainty(pose);
  const Pressure setpoint =
      control::uncertainty_to_setpoint(u, control_.law, control_.config.safety_clamp);
  const int ticks = timing_.ticks_per_pose(control_.config);
  for (int i = 0; i < ticks; ++i) {
    const control::TrackSample s = control::control_tick(*plant_, setpoint, control_.config);
    SessionFrame f;
    f.t = s.t;
    f.pose = pose;
    f.uncertainty = u;
    f.setpoint = s.setpoint;
    f.measured = s.measured;
    f.true_pressure = s.true_pressure;
    f.valves = s.valves;
    f.phase = phase;
    if (s.ruptured) {
      f.fault = "rupture";
      out.push_back(f);
      throw Error(ErrorCode::rupture, "display ruptured at t=" +
                                          std::to_string(*plant_->state().rupture_time) + " s");
    }
    out.push_back(f);
  }
}

FeedbackDemo run_feedback_demo(std::span<const Pose> poses, const learner::Ensemble& ensemble,
                               plant::Plant& plant, const control::ControlSettings& control,
                               LoopTiming timing, Phase phase) {
  FeedbackLoop loop(ensemble, plant, control, timing);
  FeedbackDemo out;
  std::vector<double> times;
  times.reserve(poses.size());
  for (const Pose& pose : poses) {
    times.push_back(loop.now());
    loop.on_pose(pose, phase, out.frames);
  }
  out.demo = learner::Demonstration::from_poses(poses, times);
  return out;
}

}  // namespace haptic::session
