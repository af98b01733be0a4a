#include "haptic/session/protocol.hpp"

#include <cmath>
#include <set>

#include "haptic/core/error.hpp"
#include "haptic/session/metrics.hpp"

namespace haptic::session {
namespace {

template <typename T>
T read(const nlohmann::json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::parse_error, std::string("config key '") + key + "' has the wrong type");
  }
}

plant::PlantState resting_state(const control::ControlSettings& control) {
  plant::PlantState s;
  s.pressure = Pressure::psi(0.0);
  s.regulator_setpoint = control::regulator_pressure(control.config);
  return s;
}

}  // namespace

SessionConfig session_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse_error, "config must be a JSON object");
  SessionConfig c;
  c.control = control::control_settings_from_json(j);
  if (j.contains("plant")) {
    const auto& p = j.at("plant");
    c.plant.tau_fill = read(p, "tau_fill_s", c.plant.tau_fill);
    c.plant.tau_vent = read(p, "tau_vent_s", c.plant.tau_vent);
    c.plant.sensor_noise_sd = read(p, "sensor_noise_sd_psi", c.plant.sensor_noise_sd);
    c.plant.leak_rate = read(p, "leak_rate_psi_s", c.plant.leak_rate);
    c.plant.validate();
  }
  if (j.contains("learner")) {
    const auto& l = j.at("learner");
    c.learner.members = read(l, "members", c.learner.members);
    c.learner.hidden = read(l, "hidden", c.learner.hidden);
    c.learner.epochs = read(l, "epochs", c.learner.epochs);
    c.learner.learning_rate = read(l, "learning_rate", c.learner.learning_rate);
    c.learner.fine_tune_epochs = read(l, "fine_tune_epochs", c.learner.fine_tune_epochs);
    c.learner.fine_tune_learning_rate =
        read(l, "fine_tune_learning_rate", c.learner.fine_tune_learning_rate);
    c.learner.full_retrain = read(l, "full_retrain", c.learner.full_retrain);
    c.learner.validate();
  }
  if (j.contains("session")) {
    const auto& s = j.at("session");
    c.timing.pose_rate_hz = read(s, "pose_rate_hz", c.timing.pose_rate_hz);
    c.expert_demos = read(s, "expert_demos", c.expert_demos);
    c.probe_poses = read(s, "probe_poses", c.probe_poses);
    c.trial_interval_s = read(s, "trial_interval_s", c.trial_interval_s);
  }
  c.telemetry_hz = read(j, "telemetry_hz", c.telemetry_hz);
  if (!(c.telemetry_hz > 0.0)) throw Error(ErrorCode::invalid_argument, "telemetry_hz must be positive");
  c.timing.ticks_per_pose(c.control.config);
  return c;
}

nlohmann::json to_json(const SessionConfig& c) {
  nlohmann::json j = control::to_json(c.control);
  j["plant"] = {{"tau_fill_s", c.plant.tau_fill},
                {"tau_vent_s", c.plant.tau_vent},
                {"sensor_noise_sd_psi", c.plant.sensor_noise_sd},
                {"leak_rate_psi_s", c.plant.leak_rate}};
  j["learner"] = {{"members", c.learner.members},
                  {"hidden", c.learner.hidden},
                  {"epochs", c.learner.epochs},
                  {"learning_rate", c.learner.learning_rate},
                  {"fine_tune_epochs", c.learner.fine_tune_epochs},
                  {"fine_tune_learning_rate", c.learner.fine_tune_learning_rate},
                  {"full_retrain", c.learner.full_retrain}};
  j["session"] = {{"pose_rate_hz", c.timing.pose_rate_hz},
                  {"expert_demos", c.expert_demos},
                  {"probe_poses", c.probe_poses},
                  {"trial_interval_s", c.trial_interval_s}};
  j["telemetry_hz"] = c.telemetry_hz;
  return j;
}

SessionSetup prepare_session(const Task& task, const SessionConfig& config, Seed seed) {
  Rng demo_rng = Rng(seed).split(streams::demos);
  const auto demos = expert_demonstrations(task, config.expert_demos, demo_rng, config.expert);
  std::set<int> removed;
  if (task.withheld()) removed.insert(*task.withheld());
  learner::TrainingSet set = learner::make_training_set(demos, removed, task);
  learner::Ensemble ensemble = learner::train(set, config.learner, seed);
  return SessionSetup{task, std::move(set), std::move(ensemble)};
}

SessionEngine::SessionEngine(SessionSetup setup, SessionConfig config, Seed seed)
    : setup_(std::move(setup)),
      config_(std::move(config)),
      seed_(seed),
      plant_(config_.plant, resting_state(config_.control), Rng(seed).split(streams::sensor)),
      last_pose_(setup_.task.pose_at(0.0)) {
  config_.control.law.validate();
  config_.control.config.validate();
}

void SessionEngine::require(bool ok, const char* what) const {
  if (!ok) {
    throw Error(ErrorCode::protocol_state,
                std::string(what) + " not allowed in phase " + std::string(to_string(phase_)));
  }
}

void SessionEngine::start_demo() {
  require(phase_ == Phase::idle &&
              (stage_ == Stage::before_demo1 || (stage_ == Stage::after_demo1 && range_)),
          "start_demo");
  poses_.clear();
  times_.clear();
  if (stage_ == Stage::before_demo1) {
    stage_ = Stage::in_demo1;
    phase_ = Phase::demo1;
  } else {
    stage_ = Stage::in_demo2;
    phase_ = Phase::demo2;
  }
}

void SessionEngine::push_pose(const Pose& pose) {
  require(phase_ == Phase::demo1 || phase_ == Phase::demo2, "set_pose");
  FeedbackLoop loop(setup_.ensemble, plant_, config_.control, config_.timing);
  times_.push_back(loop.now());
  poses_.push_back(pose);
  last_pose_ = pose;
  try {
    loop.on_pose(pose, phase_, frames_);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::rupture) fail(e.what());
    throw;
  }
}

void SessionEngine::end_demo() {
  require(phase_ == Phase::demo1 || phase_ == Phase::demo2, "end_demo");
  learner::Demonstration demo = learner::Demonstration::from_poses(poses_, times_);
  if (phase_ == Phase::demo1) {
    demo1_ = std::move(demo);
    demo1_frames_end_ = frames_.size();
    stage_ = Stage::after_demo1;
  } else {
    demo2_ = std::move(demo);
    stage_ = Stage::after_demo2;
  }
  phase_ = Phase::idle;
}

void SessionEngine::mark_segment(const ReteachRange& range) {
  require(phase_ == Phase::idle && stage_ != Stage::before_demo1 && stage_ != Stage::finished,
          "mark_segment");
  range.validate();
  range_ = range;
}

const SessionReport& SessionEngine::retrain() {
  require(phase_ == Phase::idle && stage_ == Stage::after_demo2, "retrain");
  if (!range_) throw Error(ErrorCode::protocol_state, "retrain before a re-teach range was marked");
  if (!demo2_ || demo2_->empty()) {
    throw Error(ErrorCode::protocol_state, "second demonstration recorded no poses");
  }
  phase_ = Phase::retraining;

  SessionReport r;
  r.range = range_;
  r.first_demo_samples = demo1_ ? demo1_->size() : 0;
  r.second_demo_samples = demo2_->size();
  r.initial_training_samples = setup_.initial_set.size();
  r.teaching_time_s = teaching_time(*demo2_);
  if (setup_.task.withheld()) r.correct_segment_pct = correct_segment(*demo2_, setup_.task);
  report_ = r;

  const learner::TrainingSet combined = learner::append(setup_.initial_set, *demo2_, setup_.task);
  report_->retraining_samples = combined.size();
  after_ = learner::retrain(setup_.ensemble, combined);
  const auto probe = uniform_sweep(setup_.task, config_.probe_poses);
  report_->improvement_pct = learner::improvement(setup_.ensemble, *after_, probe);
  report_->frames = frames_;

  stage_ = Stage::finished;
  phase_ = Phase::done;
  return *report_;
}

void SessionEngine::start_trial(int trial_id, Pressure first, Pressure second) {
  require(phase_ == Phase::idle, "start_trial");
  for (Pressure p : {first, second}) {
    if (!(p.psi() > 0.0 && p <= config_.control.config.safety_clamp)) {
      throw Error(ErrorCode::out_of_range, "trial pressure outside (0, safety clamp]");
    }
  }
  trial_ = ActiveTrial{trial_id, first, second, 0};
  phase_ = Phase::trial;
}

void SessionEngine::trial_tick() {
  require(phase_ == Phase::trial && trial_.has_value(), "trial_tick");
  const long per_interval =
      std::lround(config_.trial_interval_s / config_.control.config.tick);
  Pressure target = Pressure::psi(0.0);
  if (trial_->ticks < per_interval) {
    target = trial_->first;
  } else if (trial_->ticks < 2 * per_interval) {
    target = trial_->second;
  }
  const control::TrackSample s = control::control_tick(plant_, target, config_.control.config);
  ++trial_->ticks;
  SessionFrame f;
  f.t = s.t;
  f.pose = last_pose_;
  f.setpoint = s.setpoint;
  f.measured = s.measured;
  f.true_pressure = s.true_pressure;
  f.valves = s.valves;
  f.phase = Phase::trial;
  frames_.push_back(f);
}

bool SessionEngine::trial_awaiting_choice() const noexcept {
  if (!trial_) return false;
  const long per_interval =
      std::lround(config_.trial_interval_s / config_.control.config.tick);
  return trial_->ticks >= 2 * per_interval;
}

void SessionEngine::submit_choice(int trial_id, bool chose_second) {
  require(phase_ == Phase::trial && trial_.has_value(), "submit_choice");
  if (trial_id != trial_->trial_id) {
    throw Error(ErrorCode::protocol_state, "choice for trial " + std::to_string(trial_id) +
                                               " but trial " + std::to_string(trial_->trial_id) +
                                               " is active");
  }
  if (!trial_awaiting_choice()) {
    throw Error(ErrorCode::protocol_state, "choice submitted before both intervals were shown");
  }
  trials_.push_back(TrialRecord{trial_->trial_id, trial_->first, trial_->second, chose_second});
  trial_.reset();
  phase_ = Phase::idle;
}

SessionFrame SessionEngine::snapshot() const {
  if (!frames_.empty()) {
    SessionFrame f = frames_.back();
    f.phase = phase_;
    return f;
  }
  SessionFrame f;
  f.t = plant_.state().time;
  f.pose = last_pose_;
  f.setpoint = config_.control.law.p_min;
  f.measured = plant_.state().pressure;
  f.true_pressure = plant_.state().pressure;
  f.phase = phase_;
  return f;
}

void SessionEngine::fail(const std::string& why) {
  phase_ = Phase::fault;
  if (!report_) report_ = SessionReport{};
  report_->fault = why;
  report_->frames = frames_;
  if (demo1_) report_->first_demo_samples = demo1_->size();
}

SessionReport run_protocol(SessionEngine& engine, Teacher& teacher) {
  const Task& task = engine.task();
  try {
    engine.start_demo();
    for (const Pose& p : teacher.first_demo(task)) engine.push_pose(p);
    engine.end_demo();

    const auto& frames = engine.frames();
    const ReteachRange range = teacher.choose_range(task, frames);
    engine.mark_segment(range);

    engine.start_demo();
    for (const Pose& p : teacher.second_demo(task, range)) engine.push_pose(p);
    engine.end_demo();
    return engine.retrain();
  } catch (const Error& e) {
    if (engine.phase() != Phase::fault) engine.fail(e.what());
    return *engine.report();
  }
}

nlohmann::json report_json(const SessionReport& r, const std::string& task_name, Seed seed,
                           const std::optional<std::string>& frames_csv) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["task"] = task_name;
  j["seed"] = seed.value;
  j["teaching_time_s"] = r.teaching_time_s;
  j["correct_segment_pct"] = opt(r.correct_segment_pct);
  j["improvement_pct"] = opt(r.improvement_pct);
  j["reteach_range"] =
      r.range ? nlohmann::json{r.range->start, r.range->end} : nlohmann::json(nullptr);
  j["samples"] = {{"first_demo", r.first_demo_samples},
                  {"second_demo", r.second_demo_samples},
                  {"initial_training", r.initial_training_samples},
                  {"retraining", r.retraining_samples}};
  j["frames_csv"] = frames_csv ? nlohmann::json(*frames_csv) : nlohmann::json(nullptr);
  j["fault"] = r.fault ? nlohmann::json(*r.fault) : nlohmann::json(nullptr);
  return j;
}

}  // namespace haptic::session
