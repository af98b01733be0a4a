#include "haptic/psychophysics/schedule.hpp"

#include <algorithm>
#include <string>

#include "haptic/core/error.hpp"
#include "haptic/psychophysics/fit.hpp"

namespace haptic::psychophysics {
namespace {

void require_operating_range(Pressure p, const char* what) {
  if (!(p.psi() > 0.0 && p.psi() <= kRupturePsi)) {
    throw Error(ErrorCode::out_of_range,
                std::string(what) + " " + std::to_string(p.psi()) + " psi outside (0, 3.5]");
  }
}

}  // namespace

TrialSchedule::TrialSchedule(Pressure reference, std::vector<Trial> trials, int reps_per_test)
    : reference_(reference), trials_(std::move(trials)), reps_(reps_per_test) {}

const Trial* TrialSchedule::find(int trial_id) const noexcept {
  // ids are normally 1..n in order, so try the direct slot first
  if (trial_id >= 1 && static_cast<std::size_t>(trial_id) <= trials_.size() &&
      trials_[trial_id - 1].id == trial_id) {
    return &trials_[trial_id - 1];
  }
  auto it = std::find_if(trials_.begin(), trials_.end(),
                         [trial_id](const Trial& t) { return t.id == trial_id; });
  return it == trials_.end() ? nullptr : &*it;
}

TrialSchedule build_schedule(Pressure reference, std::span<const Pressure> tests, int reps,
                             int bias_reps, Seed seed) {
  if (tests.empty()) throw Error(ErrorCode::invalid_argument, "no test pressures");
  if (reps < 0 || bias_reps < 0) throw Error(ErrorCode::invalid_argument, "negative repetitions");
  require_operating_range(reference, "reference");
  for (Pressure p : tests) require_operating_range(p, "test pressure");

  Rng rng = Rng(seed).split(streams::schedule);

  std::vector<Trial> trials;
  trials.reserve(tests.size() * static_cast<std::size_t>(reps) + bias_reps);
  for (Pressure p : tests) {
    for (int r = 0; r < reps; ++r) {
      trials.push_back(Trial{0, reference, p, TrialKind::test, true});
    }
  }
  for (int r = 0; r < bias_reps; ++r) {
    trials.push_back(Trial{0, reference, reference, TrialKind::bias_probe, false});
  }

  std::shuffle(trials.begin(), trials.end(), rng);
  int id = 1;
  for (Trial& t : trials) {
    t.id = id++;
    if (t.kind == TrialKind::test && rng.bernoulli(0.5)) {
      std::swap(t.first, t.second);
      t.test_is_second = false;
    }
  }
  return TrialSchedule(reference, std::move(trials), reps);
}

ResponseLedger::ResponseLedger(TrialSchedule schedule)
    : schedule_(std::move(schedule)), answers_(schedule_.size()) {}

void ResponseLedger::record(int trial_id, bool chose_second) {
  const Trial* trial = schedule_.find(trial_id);
  if (trial == nullptr) {
    throw Error(ErrorCode::invalid_argument,
                "response for unknown trial " + std::to_string(trial_id));
  }
  auto& slot = answers_[static_cast<std::size_t>(trial - schedule_.trials().data())];
  if (slot.has_value()) {
    throw Error(ErrorCode::invalid_argument,
                "duplicate response for trial " + std::to_string(trial_id));
  }
  slot = chose_second;
  ++answered_;
}

std::optional<bool> ResponseLedger::response(int trial_id) const {
  const Trial* trial = schedule_.find(trial_id);
  if (trial == nullptr) return std::nullopt;
  return answers_[static_cast<std::size_t>(trial - schedule_.trials().data())];
}

bool ResponseLedger::complete() const noexcept { return answered_ == schedule_.size(); }

std::vector<Response> ResponseLedger::responses() const {
  std::vector<Response> out;
  out.reserve(answered_);
  auto trials = schedule_.trials();
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (answers_[i]) out.push_back(Response{trials[i].id, *answers_[i]});
  }
  return out;
}

ResponseLedger simulate_responses(const TrialSchedule& schedule, double k, Rng& rng,
                                  double p_second_on_probe) {
  ResponseLedger ledger(schedule);
  const double ref = schedule.reference().psi();
  for (const Trial& t : schedule.trials()) {
    bool chose_second = false;
    if (t.kind == TrialKind::bias_probe) {
      chose_second = rng.bernoulli(p_second_on_probe);
    } else {
      const double p_test = psychometric_percent(t.test_pressure().psi(), ref, k) / 100.0;
      const bool chose_test = rng.bernoulli(p_test);
      chose_second = t.test_is_second ? chose_test : !chose_test;
    }
    ledger.record(t.id, chose_second);
  }
  return ledger;
}

std::vector<Pressure> standard_test_pressures() {
  std::vector<Pressure> out;
  for (double p : {1.5, 1.75, 1.875, 2.0, 2.125, 2.25, 2.5}) out.push_back(Pressure::psi(p));
  return out;
}

}  // namespace haptic::psychophysics
