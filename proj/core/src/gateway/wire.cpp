#include "haptic/gateway/wire.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "haptic/core/error.hpp"

namespace haptic::gateway {
namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

CommandEnvelope decode_command(const json& j) {
  CommandEnvelope c;
  c.seq = j.at("seq").get<long long>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "start_demo") {
    c.payload = StartDemo{};
  } else if (kind == "end_demo") {
    c.payload = EndDemo{};
  } else if (kind == "set_pose") {
    c.payload = SetPose{j.at("x").get<double>(), j.at("y").get<double>(), optional_double(j, "s")};
  } else if (kind == "mark_segment") {
    c.payload = MarkSegment{j.at("start").get<double>(), j.at("end").get<double>()};
  } else if (kind == "retrain") {
    c.payload = Retrain{};
  } else if (kind == "start_trial") {
    c.payload = StartTrial{j.at("trial_id").get<int>(), j.at("first_psi").get<double>(),
                           j.at("second_psi").get<double>()};
  } else if (kind == "submit_choice") {
    c.payload = SubmitChoice{j.at("trial_id").get<int>(), j.at("chose_second").get<bool>()};
  } else {
    throw Error(ErrorCode::parse_error, "unknown command kind '" + kind + "'");
  }
  return c;
}

json encode_json(const Message& message) {
  return std::visit(
      overloaded{
          [](const TelemetryFrame& f) {
            return json{{"type", "frame"},
                        {"t", f.t},
                        {"x", f.x},
                        {"y", f.y},
                        {"s", f.s},
                        {"u", f.u},
                        {"setpoint_psi", f.setpoint_psi},
                        {"measured_psi", f.measured_psi},
                        {"fill", f.fill},
                        {"vent", f.vent},
                        {"phase", f.phase},
                        {"fault", f.fault ? json(*f.fault) : json(nullptr)}};
          },
          [](const CommandEnvelope& c) {
            json j{{"type", "cmd"}, {"seq", c.seq}, {"kind", c.kind()}};
            std::visit(overloaded{
                           [](const StartDemo&) {},
                           [](const EndDemo&) {},
                           [](const Retrain&) {},
                           [&](const SetPose& p) {
                             j["x"] = p.x;
                             j["y"] = p.y;
                             if (p.s) j["s"] = *p.s;
                           },
                           [&](const MarkSegment& m) {
                             j["start"] = m.start;
                             j["end"] = m.end;
                           },
                           [&](const StartTrial& t) {
                             j["trial_id"] = t.trial_id;
                             j["first_psi"] = t.first_psi;
                             j["second_psi"] = t.second_psi;
                           },
                           [&](const SubmitChoice& s) {
                             j["trial_id"] = s.trial_id;
                             j["chose_second"] = s.chose_second;
                           },
                       },
                       c.payload);
            return j;
          },
          [](const ReportMessage& r) {
            return json{{"type", "report"},
                        {"teaching_time_s", r.teaching_time_s},
                        {"correct_segment_pct", optional_json(r.correct_segment_pct)},
                        {"improvement_pct", optional_json(r.improvement_pct)}};
          },
          [](const ErrorMessage& e) {
            return json{{"type", "error"},
                        {"code", e.code},
                        {"message", e.message},
                        {"seq", e.seq ? json(*e.seq) : json(nullptr)}};
          },
          [](const StatusMessage& s) { return json{{"type", "status"}, {"status", s.status}}; },
      },
      message);
}

}  // namespace

std::string_view CommandEnvelope::kind() const noexcept {
  return std::visit(overloaded{
                        [](const StartDemo&) { return std::string_view("start_demo"); },
                        [](const EndDemo&) { return std::string_view("end_demo"); },
                        [](const SetPose&) { return std::string_view("set_pose"); },
                        [](const MarkSegment&) { return std::string_view("mark_segment"); },
                        [](const Retrain&) { return std::string_view("retrain"); },
                        [](const StartTrial&) { return std::string_view("start_trial"); },
                        [](const SubmitChoice&) { return std::string_view("submit_choice"); },
                    },
                    payload);
}

TelemetryFrame TelemetryFrame::from(const session::SessionFrame& f) {
  TelemetryFrame t;
  t.t = f.t;
  t.x = f.pose.position().x;
  t.y = f.pose.position().y;
  t.s = f.pose.path_parameter();
  t.u = f.uncertainty.value();
  t.setpoint_psi = f.setpoint.psi();
  t.measured_psi = f.measured.psi();
  t.fill = f.valves.fill_open;
  t.vent = f.valves.vent_open;
  t.phase = std::string(session::to_string(f.phase));
  t.fault = f.fault;
  return t;
}

ReportMessage ReportMessage::from(const session::SessionReport& r) {
  return ReportMessage{r.teaching_time_s, r.correct_segment_pct, r.improvement_pct};
}

std::string encode(const Message& message) { return encode_json(message).dump(); }

Message decode(std::string_view text) {
  try {
    const json j = json::parse(text);
    const std::string type = j.at("type").get<std::string>();
    if (type == "cmd") return decode_command(j);
    if (type == "frame") {
      TelemetryFrame f;
      f.t = j.at("t").get<double>();
      f.x = j.at("x").get<double>();
      f.y = j.at("y").get<double>();
      f.s = j.at("s").get<double>();
      f.u = j.at("u").get<double>();
      f.setpoint_psi = j.at("setpoint_psi").get<double>();
      f.measured_psi = j.at("measured_psi").get<double>();
      f.fill = j.at("fill").get<bool>();
      f.vent = j.at("vent").get<bool>();
      f.phase = j.at("phase").get<std::string>();
      if (j.contains("fault") && !j.at("fault").is_null()) f.fault = j.at("fault").get<std::string>();
      return f;
    }
    if (type == "report") {
      return ReportMessage{j.at("teaching_time_s").get<double>(),
                           optional_double(j, "correct_segment_pct"),
                           optional_double(j, "improvement_pct")};
    }
    if (type == "error") {
      ErrorMessage e{j.at("code").get<std::string>(), j.value("message", std::string()), {}};
      if (j.contains("seq") && !j.at("seq").is_null()) e.seq = j.at("seq").get<long long>();
      return e;
    }
    if (type == "status") return StatusMessage{j.at("status").get<std::string>()};
    throw Error(ErrorCode::parse_error, "unknown message type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed message: ") + e.what());
  }
}

bool SeqGuard::accept(long long seq) noexcept {
  if (last_ && seq <= *last_) return false;
  last_ = seq;
  return true;
}

void apply(session::SessionEngine& engine, const CommandEnvelope& command) {
  std::visit(overloaded{
                 [&](const StartDemo&) { engine.start_demo(); },
                 [&](const EndDemo&) { engine.end_demo(); },
                 [&](const SetPose& p) {
                   const double s = p.s ? *p.s : engine.task().project(Vec2{p.x, p.y});
                   engine.push_pose(Pose(Vec2{p.x, p.y}, s));
                 },
                 [&](const MarkSegment& m) { engine.mark_segment({m.start, m.end}); },
                 [&](const Retrain&) { engine.retrain(); },
                 [&](const StartTrial& t) {
                   engine.start_trial(t.trial_id, Pressure::psi(t.first_psi),
                                      Pressure::psi(t.second_psi));
                 },
                 [&](const SubmitChoice& c) { engine.submit_choice(c.trial_id, c.chose_second); },
             },
             command.payload);
}

session::ScriptTeacher script_teacher(const std::vector<CommandEnvelope>& commands,
                                      const session::Task& task) {
  enum class State { start1, demo1, mark, start2, demo2, tail };
  State state = State::start1;
  std::vector<Pose> first;
  std::vector<Pose> second;
  std::optional<session::ReteachRange> range;
  auto bad = [](const CommandEnvelope& c, const char* expected) {
    return Error(ErrorCode::parse_error, "script command seq " + std::to_string(c.seq) + " ('" +
                                             std::string(c.kind()) + "'): expected " + expected);
  };
  auto pose_of = [&](const SetPose& p) {
    return Pose(Vec2{p.x, p.y}, p.s ? *p.s : task.project(Vec2{p.x, p.y}));
  };
  for (const CommandEnvelope& c : commands) {
    const auto* pose = std::get_if<SetPose>(&c.payload);
    switch (state) {
      case State::start1:
        if (!std::holds_alternative<StartDemo>(c.payload)) throw bad(c, "start_demo");
        state = State::demo1;
        break;
      case State::demo1:
        if (pose) {
          first.push_back(pose_of(*pose));
        } else if (std::holds_alternative<EndDemo>(c.payload)) {
          state = State::mark;
        } else {
          throw bad(c, "set_pose or end_demo");
        }
        break;
      case State::mark:
        if (const auto* m = std::get_if<MarkSegment>(&c.payload)) {
          range = session::ReteachRange{m->start, m->end};
          state = State::start2;
        } else {
          throw bad(c, "mark_segment");
        }
        break;
      case State::start2:
        if (!std::holds_alternative<StartDemo>(c.payload)) throw bad(c, "start_demo");
        state = State::demo2;
        break;
      case State::demo2:
        if (pose) {
          second.push_back(pose_of(*pose));
        } else if (std::holds_alternative<EndDemo>(c.payload)) {
          state = State::tail;
        } else {
          throw bad(c, "set_pose or end_demo");
        }
        break;
      case State::tail:
        if (!std::holds_alternative<Retrain>(c.payload)) throw bad(c, "retrain or end of script");
        break;
    }
  }
  if (state != State::tail || !range) {
    throw Error(ErrorCode::parse_error, "script ended before the second demonstration finished");
  }
  return session::ScriptTeacher(std::move(first), *range, std::move(second));
}

std::vector<CommandEnvelope> load_command_script(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::not_found, "script file not found: " + path);
  }
  std::ifstream in(path);
  std::vector<CommandEnvelope> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Message m = decode(line);
      auto* c = std::get_if<CommandEnvelope>(&m);
      if (c == nullptr) throw Error(ErrorCode::parse_error, "not a command");
      out.push_back(std::move(*c));
    } catch (const Error& e) {
      throw Error(ErrorCode::parse_error, path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CommandEnvelope> make_script(std::span<const Pose> first, const session::ReteachRange& range,
                                         std::span<const Pose> second, bool with_retrain) {
  std::vector<CommandEnvelope> out;
  long long seq = 1;
  auto push = [&](CommandPayload p) { out.push_back(CommandEnvelope{seq++, std::move(p)}); };
  auto poses = [&](std::span<const Pose> ps) {
    for (const Pose& p : ps) push(SetPose{p.position().x, p.position().y, p.path_parameter()});
  };
  push(StartDemo{});
  poses(first);
  push(EndDemo{});
  push(MarkSegment{range.start, range.end});
  push(StartDemo{});
  poses(second);
  push(EndDemo{});
  if (with_retrain) push(Retrain{});
  return out;
}

void write_command_script(std::ostream& out, const std::vector<CommandEnvelope>& commands) {
  for (const CommandEnvelope& c : commands) out << encode(c) << '\n';
}

}  // namespace haptic::gateway
