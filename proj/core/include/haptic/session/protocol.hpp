#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "haptic/control/controller.hpp"
#include "haptic/core/random.hpp"
#include "haptic/learner/ensemble.hpp"
#include "haptic/plant/plant.hpp"
#include "haptic/session/frame.hpp"
#include "haptic/session/loop.hpp"
#include "haptic/session/task.hpp"
#include "haptic/session/teacher.hpp"

namespace haptic::session {

struct SessionConfig {
  control::ControlSettings control;
  plant::PlantParams plant = plant::PlantParams::defaults();
  LoopTiming timing;
  learner::EnsembleConfig learner;
  int expert_demos = 5;
  ExpertStyle expert;
  int probe_poses = 200;
  double trial_interval_s = 2.0;  ///< hold time per perception-trial interval
  double telemetry_hz = 20.0;
};

/// Reads the shared `--config` file. Controller keys sit at the top level;
/// optional `plant`, `learner` and `session` objects override the rest.
SessionConfig session_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionConfig& config);

/// Initial learner state for a session: expert demonstrations with the
/// withheld segment removed, and the ensemble trained on them.
struct SessionSetup {
  Task task;
  learner::TrainingSet initial_set;
  learner::Ensemble ensemble;
};

SessionSetup prepare_session(const Task& task, const SessionConfig& config, Seed seed);

struct SessionReport {
  double teaching_time_s = 0.0;
  std::optional<double> correct_segment_pct;  ///< absent when nothing was withheld
  std::optional<double> improvement_pct;
  std::optional<ReteachRange> range;
  std::vector<SessionFrame> frames;
  std::optional<std::string> fault;
  std::size_t first_demo_samples = 0;
  std::size_t second_demo_samples = 0;
  std::size_t initial_training_samples = 0;
  std::size_t retraining_samples = 0;
};

/// Perception-mode record kept on the gateway side.
struct TrialRecord {
  int trial_id = 0;
  Pressure first;
  Pressure second;
  bool chose_second = false;
};

/// The teaching protocol as an explicit state machine. Headless runs and the
/// live service drive the same engine, so identical inputs give identical
/// reports.
///
///   idle --start_demo--> demo1 --end_demo--> idle --mark_segment-->
///   idle --start_demo--> demo2 --end_demo--> idle --retrain--> done
///
/// Perception trials (start_trial / submit_choice) are accepted while idle.
class SessionEngine {
 public:
  SessionEngine(SessionSetup setup, SessionConfig config, Seed seed);
  SessionEngine(const SessionEngine&) = delete;
  SessionEngine& operator=(const SessionEngine&) = delete;

  Phase phase() const noexcept { return phase_; }
  const Task& task() const noexcept { return setup_.task; }
  const SessionConfig& config() const noexcept { return config_; }
  const learner::Ensemble& ensemble() const noexcept { return setup_.ensemble; }
  const learner::TrainingSet& initial_set() const noexcept { return setup_.initial_set; }

  void start_demo();
  void push_pose(const Pose& pose);
  void end_demo();
  void mark_segment(const ReteachRange& range);
  const SessionReport& retrain();

  void start_trial(int trial_id, Pressure first, Pressure second);
  /// One control tick of the active perception trial.
  void trial_tick();
  bool trial_awaiting_choice() const noexcept;
  void submit_choice(int trial_id, bool chose_second);
  const std::vector<TrialRecord>& trial_records() const noexcept { return trials_; }

  const std::vector<SessionFrame>& frames() const noexcept { return frames_; }
  /// Latest frame, or a resting frame built from the plant state before any
  /// demonstration has run.
  SessionFrame snapshot() const;
  const std::optional<SessionReport>& report() const noexcept { return report_; }
  std::optional<learner::Ensemble> retrained() const { return after_; }
  const std::optional<learner::Demonstration>& second_demonstration() const noexcept { return demo2_; }
  const std::optional<learner::Demonstration>& first_demonstration() const noexcept { return demo1_; }

  /// Aborts with a fault annotation; the partially filled report survives.
  void fail(const std::string& why);

 private:
  enum class Stage { before_demo1, in_demo1, after_demo1, in_demo2, after_demo2, finished };

  struct ActiveTrial {
    int trial_id = 0;
    Pressure first;
    Pressure second;
    long ticks = 0;
  };

  void require(bool ok, const char* what) const;

  SessionSetup setup_;
  SessionConfig config_;
  Seed seed_;
  plant::Plant plant_;
  Phase phase_ = Phase::idle;
  Stage stage_ = Stage::before_demo1;
  std::vector<SessionFrame> frames_;
  std::size_t demo1_frames_end_ = 0;
  std::vector<Pose> poses_;
  std::vector<double> times_;
  std::optional<learner::Demonstration> demo1_;
  std::optional<learner::Demonstration> demo2_;
  std::optional<ReteachRange> range_;
  std::optional<learner::Ensemble> after_;
  std::optional<SessionReport> report_;
  std::optional<ActiveTrial> trial_;
  std::vector<TrialRecord> trials_;
  Pose last_pose_;
};

/// Runs both demonstrations with the given teacher, retrains, and fills the
/// report. Component failures end the run with a fault-annotated partial
/// report instead of an exception.
SessionReport run_protocol(SessionEngine& engine, Teacher& teacher);

/// `{task, seed, teaching_time_s, correct_segment_pct, improvement_pct,
///   reteach_range, samples, frames_csv, fault}`
nlohmann::json report_json(const SessionReport& report, const std::string& task_name, Seed seed,
                           const std::optional<std::string>& frames_csv);

}  // namespace haptic::session
