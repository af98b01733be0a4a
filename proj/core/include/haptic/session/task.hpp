#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "haptic/core/types.hpp"

namespace haptic::session {

/// Contiguous slice [start, end) of the path parameter. The last segment of a
/// task also owns s = 1.
struct Segment {
  int id = 0;
  double start = 0.0;
  double end = 0.0;

  double length() const noexcept { return end - start; }
};

/// A planar waypoint path split into segments. Path parameter s is the
/// arc-length fraction along the polyline.
class Task {
 public:
  Task(std::string name, std::vector<Vec2> waypoints, std::vector<Segment> segments,
       std::optional<int> withheld);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Vec2>& waypoints() const noexcept { return waypoints_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  /// Segment left out of the initial training set, if any.
  std::optional<int> withheld() const noexcept { return withheld_; }
  const Segment& withheld_segment() const;
  const Segment& segment(int id) const;
  bool has_segment(int id) const noexcept;

  double length() const noexcept { return cumulative_.back(); }
  Vec2 point_at(double s) const;
  Pose pose_at(double s) const { return Pose(point_at(s), s); }
  /// Unit tangent of the leg containing s.
  Vec2 direction_at(double s) const;
  int segment_of(double s) const;
  /// Path parameter of the closest point on the path.
  double project(Vec2 p) const;

  Task with_withheld(std::optional<int> withheld) const;

 private:
  std::string name_;
  std::vector<Vec2> waypoints_;
  std::vector<Segment> segments_;
  std::optional<int> withheld_;
  std::vector<double> cumulative_;  // arc length at each waypoint
};

/// `{name, waypoints: [[x,y],...], segments: [{id, start, end}], withheld}`
/// (`withheld` may be null).
Task task_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Task& task);
Task load_task(const std::string& path);

/// Three-segment pick / place / drag path with the first segment withheld.
Task cleaning_task();

}  // namespace haptic::session
