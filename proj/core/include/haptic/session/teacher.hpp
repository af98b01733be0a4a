#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "haptic/core/random.hpp"
#include "haptic/learner/dataset.hpp"
#include "haptic/session/frame.hpp"
#include "haptic/session/task.hpp"

namespace haptic::session {

/// Path-parameter interval the teacher chooses to demonstrate again.
struct ReteachRange {
  double start = 0.0;
  double end = 1.0;

  void validate() const;
};

/// Source of demonstrations. Poses are sampled at the loop's pose rate.
class Teacher {
 public:
  virtual ~Teacher() = default;
  virtual std::vector<Pose> first_demo(const Task& task) = 0;
  virtual ReteachRange choose_range(const Task& task, std::span<const SessionFrame> first_trace) = 0;
  virtual std::vector<Pose> second_demo(const Task& task, const ReteachRange& range) = 0;
};

/// Poses along the path from `start` to `end` at a constant path speed that
/// covers the full task in `full_task_samples` samples.
std::vector<Pose> path_poses(const Task& task, double start, double end,
                             int full_task_samples = 200);

/// Knows the ground truth. `withheld` re-teaches exactly the withheld
/// segment, `full` the whole task, `segment` a fixed segment id.
class OracleTeacher final : public Teacher {
 public:
  enum class Mode { withheld, full, segment };

  explicit OracleTeacher(Mode mode = Mode::withheld, int segment_id = 0,
                         int full_task_samples = 200);

  std::vector<Pose> first_demo(const Task& task) override;
  ReteachRange choose_range(const Task& task, std::span<const SessionFrame> first_trace) override;
  std::vector<Pose> second_demo(const Task& task, const ReteachRange& range) override;

 private:
  Mode mode_;
  int segment_id_;
  int samples_;
};

/// Re-teaches the longest stretch of the first demonstration where the
/// display was inflated above `threshold_psi`, the way a person reading the
/// sleeve would.
class FeedbackTeacher final : public Teacher {
 public:
  explicit FeedbackTeacher(double threshold_psi = 2.0, int full_task_samples = 200);

  std::vector<Pose> first_demo(const Task& task) override;
  ReteachRange choose_range(const Task& task, std::span<const SessionFrame> first_trace) override;
  std::vector<Pose> second_demo(const Task& task, const ReteachRange& range) override;

 private:
  double threshold_;
  int samples_;
};

/// Replays a recorded operator command stream (the same JSON command
/// envelopes the service accepts, one per line).
class ScriptTeacher final : public Teacher {
 public:
  ScriptTeacher(std::vector<Pose> first, ReteachRange range, std::vector<Pose> second);

  std::vector<Pose> first_demo(const Task& task) override;
  ReteachRange choose_range(const Task& task, std::span<const SessionFrame> first_trace) override;
  std::vector<Pose> second_demo(const Task& task, const ReteachRange& range) override;

 private:
  std::vector<Pose> first_;
  ReteachRange range_;
  std::vector<Pose> second_;
};

/// Expert demonstrations for initial training: full traversals with a
/// per-demo lateral offset, a slow lateral wobble and a speed factor.
struct ExpertStyle {
  double duration_s = 10.0;
  double rate_hz = 10.0;  ///< logging rate of the recorded expert runs
  double lateral_sd = 0.01;   ///< m
  double wobble = 0.005;      ///< m
  double speed_jitter = 0.1;  ///< +/- fraction of nominal speed
};

std::vector<learner::Demonstration> expert_demonstrations(const Task& task, int count, Rng& rng,
                                                          const ExpertStyle& style = {});

}  // namespace haptic::session
