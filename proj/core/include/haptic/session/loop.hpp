#pragma once

#include <span>
#include <vector>

#include "haptic/control/controller.hpp"
#include "haptic/learner/dataset.hpp"
#include "haptic/learner/ensemble.hpp"
#include "haptic/plant/plant.hpp"
#include "haptic/session/frame.hpp"

namespace haptic::session {

struct LoopTiming {
  double pose_rate_hz = 20.0;  ///< teacher poses and uncertainty refresh

  /// Control ticks run per pose sample (zero-order hold between samples).
  int ticks_per_pose(const control::ControllerConfig& cfg) const;
};

/// Closed feedback loop: every teacher pose triggers one uncertainty query,
/// the rendering law turns it into a setpoint, and the bang-bang controller
/// drives the plant for one pose period at the control rate.
class FeedbackLoop {
 public:
  FeedbackLoop(const learner::Ensemble& ensemble, plant::Plant& plant,
               control::ControlSettings control, LoopTiming timing = {});

  /// Runs one pose period. Frames are appended to `out`. Throws
  /// `ErrorCode::rupture` if the display tears.
  void on_pose(const Pose& pose, Phase phase, std::vector<SessionFrame>& out);

  double now() const noexcept { return plant_->state().time; }
  double pose_period() const noexcept { return 1.0 / timing_.pose_rate_hz; }
  void set_ensemble(const learner::Ensemble& e) noexcept { ensemble_ = &e; }

 private:
  const learner::Ensemble* ensemble_;
  plant::Plant* plant_;
  control::ControlSettings control_;
  LoopTiming timing_;
};

struct FeedbackDemo {
  learner::Demonstration demo;
  std::vector<SessionFrame> frames;
};

/// Feeds a sampled pose trace through the loop and records the demonstration
/// (pose, finite-difference velocity, time) alongside the frame trace.
FeedbackDemo run_feedback_demo(std::span<const Pose> poses, const learner::Ensemble& ensemble,
                               plant::Plant& plant, const control::ControlSettings& control,
                               LoopTiming timing = {}, Phase phase = Phase::demo1);

}  // namespace haptic::session
