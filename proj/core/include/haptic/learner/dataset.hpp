#pragma once

#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "haptic/core/types.hpp"
#include "haptic/session/task.hpp"

namespace haptic::learner {

struct DemoSample {
  Pose pose;
  Vec2 action;  ///< commanded velocity, m/s
  double t = 0.0;
};

/// Timestamped pose/action trace recorded from a teacher. Timestamps
/// strictly increase.
class Demonstration {
 public:
  Demonstration() = default;
  explicit Demonstration(std::vector<DemoSample> samples);

  /// Builds a demonstration from a pose trace; each action is the
  /// finite-difference velocity toward the next pose (the last sample
  /// repeats the previous velocity, a single sample gets zero).
  static Demonstration from_poses(std::span<const Pose> poses, std::span<const double> times);

  const std::vector<DemoSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  double teaching_time() const noexcept {
    return samples_.empty() ? 0.0 : samples_.back().t - samples_.front().t;
  }

 private:
  std::vector<DemoSample> samples_;
};

struct TrainingPair {
  Pose pose;
  Vec2 action;
  int segment_id = 0;
};

struct TrainingSet {
  std::vector<TrainingPair> pairs;
  /// Source segment ids present in `pairs`, ascending.
  std::vector<int> provenance;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

/// Concatenates every demo sample whose pose falls outside the removed
/// segments. Throws `empty_training_set` if nothing is left.
TrainingSet make_training_set(std::span<const Demonstration> demos, const std::set<int>& removed,
                              const session::Task& task);

/// Appends a demonstration's samples (all segments) to a training set.
TrainingSet append(const TrainingSet& base, const Demonstration& demo, const session::Task& task);

/// JSON lines, one `{t, x, y, s, ax, ay}` object per sample.
void write_demonstration_jsonl(std::ostream& out, const Demonstration& demo);
Demonstration read_demonstration_jsonl(std::istream& in);
Demonstration load_demonstration(const std::string& path);

}  // namespace haptic::learner
