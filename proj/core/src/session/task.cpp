#include "haptic/session/task.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "haptic/core/error.hpp"

namespace haptic::session {
namespace {

constexpr double kPartitionTolerance = 1e-9;

}  // namespace

Task::Task(std::string name, std::vector<Vec2> waypoints, std::vector<Segment> segments,
           std::optional<int> withheld)
    : name_(std::move(name)),
      waypoints_(std::move(waypoints)),
      segments_(std::move(segments)),
      withheld_(withheld) {
  if (waypoints_.size() < 2) throw Error(ErrorCode::invalid_argument, "task needs >= 2 waypoints");
  cumulative_.assign(1, 0.0);
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    cumulative_.push_back(cumulative_.back() + (waypoints_[i] - waypoints_[i - 1]).norm());
  }
  if (!(length() > 0.0)) throw Error(ErrorCode::invalid_argument, "task path has zero length");

  if (segments_.empty()) throw Error(ErrorCode::invalid_argument, "task has no segments");
  std::sort(segments_.begin(), segments_.end(),
            [](const Segment& a, const Segment& b) { return a.start < b.start; });
  double cursor = 0.0;
  for (const Segment& seg : segments_) {
    if (std::abs(seg.start - cursor) > kPartitionTolerance || !(seg.end > seg.start)) {
      throw Error(ErrorCode::invalid_argument,
                  "segments must partition [0, 1] without gaps or overlaps");
    }
    cursor = seg.end;
  }
  if (std::abs(cursor - 1.0) > kPartitionTolerance) {
    throw Error(ErrorCode::invalid_argument, "segments must end at 1");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    for (std::size_t j = i + 1; j < segments_.size(); ++j) {
      if (segments_[i].id == segments_[j].id) {
        throw Error(ErrorCode::invalid_argument, "duplicate segment id");
      }
    }
  }
  if (withheld_ && !has_segment(*withheld_)) {
    throw Error(ErrorCode::invalid_argument, "withheld segment is not a task segment");
  }
}

bool Task::has_segment(int id) const noexcept {
  return std::any_of(segments_.begin(), segments_.end(),
                     [id](const Segment& s) { return s.id == id; });
}

const Segment& Task::segment(int id) const {
  for (const Segment& s : segments_) {
    if (s.id == id) return s;
  }
  throw Error(ErrorCode::invalid_argument, "unknown segment " + std::to_string(id));
}

const Segment& Task::withheld_segment() const {
  if (!withheld_) throw Error(ErrorCode::invalid_argument, "task has no withheld segment");
  return segment(*withheld_);
}

Vec2 Task::point_at(double s) const {
  const double d = std::clamp(s, 0.0, 1.0) * length();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), d);
  std::size_t leg = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  leg = std::min(leg, waypoints_.size() - 2);
  const double leg_len = cumulative_[leg + 1] - cumulative_[leg];
  const double f = leg_len > 0.0 ? (d - cumulative_[leg]) / leg_len : 0.0;
  return waypoints_[leg] + f * (waypoints_[leg + 1] - waypoints_[leg]);
}

Vec2 Task::direction_at(double s) const {
  const double d = std::clamp(s, 0.0, 1.0) * length();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), d);
  std::size_t leg = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  leg = std::min(leg, waypoints_.size() - 2);
  const Vec2 delta = waypoints_[leg + 1] - waypoints_[leg];
  const double n = delta.norm();
  return n > 0.0 ? (1.0 / n) * delta : Vec2{};
}

int Task::segment_of(double s) const {
  for (const Segment& seg : segments_) {
    if (s >= seg.start && s < seg.end) return seg.id;
  }
  return s < segments_.front().start ? segments_.front().id : segments_.back().id;
}

double Task::project(Vec2 p) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    const Vec2 a = waypoints_[i];
    const Vec2 ab = waypoints_[i + 1] - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double f = len2 > 0.0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
    f = std::clamp(f, 0.0, 1.0);
    const Vec2 q = a + f * ab;
    const double d2 = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = (cumulative_[i] + f * (cumulative_[i + 1] - cumulative_[i])) / length();
    }
  }
  return std::clamp(best_s, 0.0, 1.0);
}

Task Task::with_withheld(std::optional<int> withheld) const {
  return Task(name_, waypoints_, segments_, withheld);
}

Task task_from_json(const nlohmann::json& j) {
  try {
    std::vector<Vec2> waypoints;
    for (const auto& w : j.at("waypoints")) {
      if (!w.is_array() || w.size() != 2) {
        throw Error(ErrorCode::parse_error, "waypoint must be [x, y]");
      }
      waypoints.push_back(Vec2{w.at(0).get<double>(), w.at(1).get<double>()});
    }
    std::vector<Segment> segments;
    for (const auto& s : j.at("segments")) {
      segments.push_back(
          Segment{s.at("id").get<int>(), s.at("start").get<double>(), s.at("end").get<double>()});
    }
    std::optional<int> withheld;
    if (j.contains("withheld") && !j.at("withheld").is_null()) withheld = j.at("withheld").get<int>();
    return Task(j.value("name", std::string("task")), std::move(waypoints), std::move(segments),
                withheld);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("task file: ") + e.what());
  }
}

nlohmann::json to_json(const Task& task) {
  nlohmann::json waypoints = nlohmann::json::array();
  for (const Vec2& w : task.waypoints()) waypoints.push_back({w.x, w.y});
  nlohmann::json segments = nlohmann::json::array();
  for (const Segment& s : task.segments()) {
    segments.push_back({{"id", s.id}, {"start", s.start}, {"end", s.end}});
  }
  nlohmann::json j{{"name", task.name()}, {"waypoints", waypoints}, {"segments", segments}};
  j["withheld"] = task.withheld() ? nlohmann::json(*task.withheld()) : nlohmann::json(nullptr);
  return j;
}

Task load_task(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::not_found, "task file not found: " + path);
  }
  std::ifstream in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, "task file " + path + ": " + e.what());
  }
  return task_from_json(j);
}

Task cleaning_task() {
  return Task("cleaning", {{0.0, 0.0}, {0.24, 0.32}, {0.64, 0.32}, {0.88, 0.0}},
              {{1, 0.0, 1.0 / 3.0}, {2, 1.0 / 3.0, 2.0 / 3.0}, {3, 2.0 / 3.0, 1.0}}, 1);
}

}  // namespace haptic::session
