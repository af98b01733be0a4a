#include "haptic/session/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "haptic/core/error.hpp"

namespace haptic::session {

double teaching_time(const learner::Demonstration& demo) {
  if (demo.empty()) throw Error(ErrorCode::invalid_argument, "empty demonstration");
  return demo.teaching_time();
}

double correct_segment(const learner::Demonstration& demo, const Task& task) {
  if (demo.empty()) throw Error(ErrorCode::invalid_argument, "empty demonstration");
  const Segment& target = task.withheld_segment();
  const auto& samples = demo.samples();

  double travel = 0.0;
  double inside = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double a = samples[i - 1].pose.path_parameter();
    const double b = samples[i].pose.path_parameter();
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    travel += hi - lo;
    inside += std::max(0.0, std::min(hi, target.end) - std::max(lo, target.start));
  }
  if (travel > 0.0) return std::clamp(100.0 * (inside / travel), 0.0, 100.0);

  const auto hits = std::count_if(samples.begin(), samples.end(), [&](const learner::DemoSample& s) {
    return task.segment_of(s.pose.path_parameter()) == target.id;
  });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(samples.size());
}

std::vector<Pose> uniform_sweep(const Task& task, int count) {
  if (count < 2) throw Error(ErrorCode::invalid_argument, "sweep needs at least 2 poses");
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(task.pose_at(static_cast<double>(i) / (count - 1)));
  }
  return out;
}

}  // namespace haptic::session
