#include "haptic/session/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "haptic/core/error.hpp"

namespace haptic::session {

void ReteachRange::validate() const {
  if (!(start >= 0.0 && start < end && end <= 1.0)) {
    throw Error(ErrorCode::out_of_range, "re-teach range must satisfy 0 <= start < end <= 1");
  }
}

std::vector<Pose> path_poses(const Task& task, double start, double end, int full_task_samples) {
  if (full_task_samples < 2) throw Error(ErrorCode::invalid_argument, "need >= 2 samples");
  start = std::clamp(start, 0.0, 1.0);
  end = std::clamp(end, 0.0, 1.0);
  const long n = std::lround(std::abs(end - start) * (full_task_samples - 1)) + 1;
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double s = n == 1 ? start : start + (end - start) * static_cast<double>(i) / (n - 1);
    out.push_back(task.pose_at(s));
  }
  return out;
}

OracleTeacher::OracleTeacher(Mode mode, int segment_id, int full_task_samples)
    : mode_(mode), segment_id_(segment_id), samples_(full_task_samples) {}

std::vector<Pose> OracleTeacher::first_demo(const Task& task) {
  return path_poses(task, 0.0, 1.0, samples_);
}

ReteachRange OracleTeacher::choose_range(const Task& task, std::span<const SessionFrame>) {
  switch (mode_) {
    case Mode::withheld: {
      const Segment& s = task.withheld_segment();
      return {s.start, s.end};
    }
    case Mode::segment: {
      const Segment& s = task.segment(segment_id_);
      return {s.start, s.end};
    }
    case Mode::full:
      break;
  }
  return {0.0, 1.0};
}

std::vector<Pose> OracleTeacher::second_demo(const Task& task, const ReteachRange& range) {
  range.validate();
  return path_poses(task, range.start, range.end, samples_);
}

FeedbackTeacher::FeedbackTeacher(double threshold_psi, int full_task_samples)
    : threshold_(threshold_psi), samples_(full_task_samples) {}

std::vector<Pose> FeedbackTeacher::first_demo(const Task& task) {
  return path_poses(task, 0.0, 1.0, samples_);
}

ReteachRange FeedbackTeacher::choose_range(const Task&, std::span<const SessionFrame> first_trace) {
  std::size_t best_begin = 0;
  std::size_t best_len = 0;
  std::size_t i = 0;
  while (i < first_trace.size()) {
    if (first_trace[i].setpoint.psi() <= threshold_) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < first_trace.size() && first_trace[j].setpoint.psi() > threshold_) ++j;
    if (j - i > best_len) {
      best_len = j - i;
      best_begin = i;
    }
    i = j;
  }
  if (best_len == 0) return {0.0, 1.0};
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t k = best_begin; k < best_begin + best_len; ++k) {
    lo = std::min(lo, first_trace[k].pose.path_parameter());
    hi = std::max(hi, first_trace[k].pose.path_parameter());
  }
  if (!(hi > lo)) return {0.0, 1.0};
  return {lo, hi};
}

std::vector<Pose> FeedbackTeacher::second_demo(const Task& task, const ReteachRange& range) {
  range.validate();
  return path_poses(task, range.start, range.end, samples_);
}

ScriptTeacher::ScriptTeacher(std::vector<Pose> first, ReteachRange range, std::vector<Pose> second)
    : first_(std::move(first)), range_(range), second_(std::move(second)) {
  range_.validate();
}

std::vector<Pose> ScriptTeacher::first_demo(const Task&) { return first_; }

ReteachRange ScriptTeacher::choose_range(const Task&, std::span<const SessionFrame>) { return range_; }

std::vector<Pose> ScriptTeacher::second_demo(const Task&, const ReteachRange&) { return second_; }

std::vector<learner::Demonstration> expert_demonstrations(const Task& task, int count, Rng& rng,
                                                          const ExpertStyle& style) {
  if (count < 1) throw Error(ErrorCode::invalid_argument, "need at least one expert demonstration");
  std::vector<learner::Demonstration> demos;
  demos.reserve(static_cast<std::size_t>(count));
  for (int d = 0; d < count; ++d) {
    const double speed = 1.0 + rng.uniform(-style.speed_jitter, style.speed_jitter);
    const double offset = rng.normal(0.0, style.lateral_sd);
    const double cycles = rng.uniform(1.0, 3.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const long n = std::max(2L, std::lround(style.duration_s / speed * style.rate_hz) + 1);

    std::vector<Pose> poses;
    std::vector<double> times;
    poses.reserve(static_cast<std::size_t>(n));
    times.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      const double s = static_cast<double>(i) / (n - 1);
      const Vec2 dir = task.direction_at(s);
      const Vec2 normal{-dir.y, dir.x};
      const double lateral = offset + style.wobble * std::sin(2.0 * std::numbers::pi * cycles * s + phase);
      poses.emplace_back(task.point_at(s) + lateral * normal, s);
      times.push_back(static_cast<double>(i) / style.rate_hz);
    }
    demos.push_back(learner::Demonstration::from_poses(poses, times));
  }
  return demos;
}

}  // namespace haptic::session
