#pragma once

#include <cmath>

namespace haptic {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;

  double norm() const { return std::hypot(x, y); }
};

/// Learner uncertainty as a fraction; shown to people as 0-100 %.
class UncertaintyLevel {
 public:
  constexpr UncertaintyLevel() = default;

  /// Clamps into [0, 1]. Throws on NaN.
  static UncertaintyLevel clamp(double x);

  constexpr double value() const noexcept { return value_; }
  constexpr double percent() const noexcept { return 100.0 * value_; }

  friend constexpr bool operator==(UncertaintyLevel, UncertaintyLevel) = default;

 private:
  explicit constexpr UncertaintyLevel(double v) : value_(v) {}
  double value_ = 0.0;
};

inline UncertaintyLevel clamp_uncertainty(double x) { return UncertaintyLevel::clamp(x); }

/// End-effector pose in the simulation plane. `path_parameter` locates the
/// pose along the task path and stands in for the arm's joint configuration.
class Pose {
 public:
  constexpr Pose() = default;
  Pose(Vec2 position, double path_parameter);

  constexpr Vec2 position() const noexcept { return position_; }
  constexpr double path_parameter() const noexcept { return s_; }

  friend constexpr bool operator==(const Pose&, const Pose&) = default;

 private:
  Vec2 position_{};
  double s_ = 0.0;
};

}  // namespace haptic
