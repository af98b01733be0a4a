#include "haptic/learner/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "haptic/core/error.hpp"

namespace haptic::learner {

Demonstration::Demonstration(std::vector<DemoSample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].t > samples_[i - 1].t)) {
      throw Error(ErrorCode::invalid_argument, "demonstration timestamps must strictly increase");
    }
  }
}

Demonstration Demonstration::from_poses(std::span<const Pose> poses, std::span<const double> times) {
  if (poses.size() != times.size()) {
    throw Error(ErrorCode::invalid_argument, "pose and time traces differ in length");
  }
  std::vector<DemoSample> samples(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    samples[i].pose = poses[i];
    samples[i].t = times[i];
    if (i + 1 < poses.size()) {
      const double dt = times[i + 1] - times[i];
      if (!(dt > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "demonstration timestamps must strictly increase");
      }
      samples[i].action = (1.0 / dt) * (poses[i + 1].position() - poses[i].position());
    } else if (i > 0) {
      samples[i].action = samples[i - 1].action;
    }
  }
  return Demonstration(std::move(samples));
}

TrainingSet make_training_set(std::span<const Demonstration> demos, const std::set<int>& removed,
                              const session::Task& task) {
  if (demos.empty()) throw Error(ErrorCode::invalid_argument, "no demonstrations");
  for (int id : removed) {
    if (!task.has_segment(id)) {
      throw Error(ErrorCode::invalid_argument,
                  "removed segment " + std::to_string(id) + " is not a task segment");
    }
  }
  TrainingSet out;
  std::set<int> kept;
  for (const Demonstration& demo : demos) {
    for (const DemoSample& s : demo.samples()) {
      const int seg = task.segment_of(s.pose.path_parameter());
      if (removed.contains(seg)) continue;
      out.pairs.push_back(TrainingPair{s.pose, s.action, seg});
      kept.insert(seg);
    }
  }
  if (out.pairs.empty()) {
    throw Error(ErrorCode::empty_training_set, "segment removal left no training samples");
  }
  out.provenance.assign(kept.begin(), kept.end());
  return out;
}

TrainingSet append(const TrainingSet& base, const Demonstration& demo, const session::Task& task) {
  TrainingSet out = base;
  std::set<int> kept(base.provenance.begin(), base.provenance.end());
  for (const DemoSample& s : demo.samples()) {
    const int seg = task.segment_of(s.pose.path_parameter());
    out.pairs.push_back(TrainingPair{s.pose, s.action, seg});
    kept.insert(seg);
  }
  out.provenance.assign(kept.begin(), kept.end());
  return out;
}

void write_demonstration_jsonl(std::ostream& out, const Demonstration& demo) {
  for (const DemoSample& s : demo.samples()) {
    nlohmann::json j{{"t", s.t},
                     {"x", s.pose.position().x},
                     {"y", s.pose.position().y},
                     {"s", s.pose.path_parameter()},
                     {"ax", s.action.x},
                     {"ay", s.action.y}};
    out << j.dump() << '\n';
  }
}

Demonstration read_demonstration_jsonl(std::istream& in) {
  std::vector<DemoSample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DemoSample s;
      s.t = j.at("t").get<double>();
      s.pose = Pose(Vec2{j.at("x").get<double>(), j.at("y").get<double>()}, j.at("s").get<double>());
      s.action = Vec2{j.value("ax", 0.0), j.value("ay", 0.0)};
      samples.push_back(s);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Demonstration(std::move(samples));
}

Demonstration load_demonstration(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::not_found, "demonstration file not found: " + path);
  }
  std::ifstream in(path);
  return read_demonstration_jsonl(in);
}

}  // namespace haptic::learner
