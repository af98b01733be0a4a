#pragma once

#include "haptic/learner/dataset.hpp"
#include "haptic/session/task.hpp"

namespace haptic::session {

/// Seconds between the first and last sample.
double teaching_time(const learner::Demonstration& demo);

/// Share of the demonstration's path-parameter travel that lies inside the
/// task's withheld segment, in percent. A demonstration that never moves
/// along the path falls back to the fraction of samples inside the segment.
double correct_segment(const learner::Demonstration& demo, const Task& task);

/// Poses at `count` evenly spaced path parameters over the whole task.
std::vector<Pose> uniform_sweep(const Task& task, int count = 200);

}  // namespace haptic::session
