#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "haptic/session/frame.hpp"
#include "haptic/session/protocol.hpp"

namespace haptic::gateway {

// Operator commands. Field names match the JSON payload keys.
struct StartDemo {
  friend bool operator==(const StartDemo&, const StartDemo&) = default;
};
struct EndDemo {
  friend bool operator==(const EndDemo&, const EndDemo&) = default;
};
struct SetPose {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> s;  ///< projected onto the task path when absent
  friend bool operator==(const SetPose&, const SetPose&) = default;
};
struct MarkSegment {
  double start = 0.0;
  double end = 1.0;
  friend bool operator==(const MarkSegment&, const MarkSegment&) = default;
};
struct Retrain {
  friend bool operator==(const Retrain&, const Retrain&) = default;
};
struct StartTrial {
  int trial_id = 0;
  double first_psi = 0.0;
  double second_psi = 0.0;
  friend bool operator==(const StartTrial&, const StartTrial&) = default;
};
struct SubmitChoice {
  int trial_id = 0;
  bool chose_second = false;
  friend bool operator==(const SubmitChoice&, const SubmitChoice&) = default;
};

using CommandPayload =
    std::variant<StartDemo, EndDemo, SetPose, MarkSegment, Retrain, StartTrial, SubmitChoice>;

/// `{"type":"cmd","seq":n,"kind":str,...}`
struct CommandEnvelope {
  long long seq = 0;
  CommandPayload payload;

  std::string_view kind() const noexcept;
  friend bool operator==(const CommandEnvelope&, const CommandEnvelope&) = default;
};

/// `{"type":"frame","t":f,"x":f,"y":f,"s":f,"u":f,"setpoint_psi":f,
///   "measured_psi":f,"fill":b,"vent":b,"phase":str,"fault":str|null}`
struct TelemetryFrame {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double s = 0.0;
  double u = 0.0;
  double setpoint_psi = 0.0;
  double measured_psi = 0.0;
  bool fill = false;
  bool vent = false;
  std::string phase = "idle";
  std::optional<std::string> fault;

  static TelemetryFrame from(const session::SessionFrame& f);
  friend bool operator==(const TelemetryFrame&, const TelemetryFrame&) = default;
};

/// `{"type":"report","teaching_time_s":f,"correct_segment_pct":f,"improvement_pct":f}`
struct ReportMessage {
  double teaching_time_s = 0.0;
  std::optional<double> correct_segment_pct;
  std::optional<double> improvement_pct;

  static ReportMessage from(const session::SessionReport& r);
  friend bool operator==(const ReportMessage&, const ReportMessage&) = default;
};

/// `{"type":"error","code":str,"message":str,"seq":n|null}`
struct ErrorMessage {
  std::string code;
  std::string message;
  std::optional<long long> seq;
  friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

/// `{"type":"status","status":str}`; "busy" rejects a second operator.
struct StatusMessage {
  std::string status;
  friend bool operator==(const StatusMessage&, const StatusMessage&) = default;
};

using Message =
    std::variant<TelemetryFrame, CommandEnvelope, ReportMessage, ErrorMessage, StatusMessage>;

std::string encode(const Message& message);
/// Throws `ErrorCode::parse_error` on malformed or unknown messages.
Message decode(std::string_view text);

/// Rejects commands whose seq does not exceed the last accepted one.
class SeqGuard {
 public:
  bool accept(long long seq) noexcept;
  std::optional<long long> last() const noexcept { return last_; }

 private:
  std::optional<long long> last_;
};

/// Applies one command to the engine. Pose commands without `s` are
/// projected onto the task path.
void apply(session::SessionEngine& engine, const CommandEnvelope& command);

/// Reads a command script (JSON lines of command envelopes) into a teacher.
/// The script must hold, in order: start_demo, set_pose..., end_demo,
/// mark_segment, start_demo, set_pose..., end_demo; a trailing retrain is
/// allowed.
session::ScriptTeacher script_teacher(const std::vector<CommandEnvelope>& commands,
                                      const session::Task& task);
std::vector<CommandEnvelope> load_command_script(const std::string& path);

/// Canonical command stream for one protocol run, numbered from 1.
std::vector<CommandEnvelope> make_script(std::span<const Pose> first, const session::ReteachRange& range,
                                         std::span<const Pose> second, bool with_retrain = true);
void write_command_script(std::ostream& out, const std::vector<CommandEnvelope>& commands);

}  // namespace haptic::gateway
