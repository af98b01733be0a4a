#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "haptic/core/random.hpp"
#include "haptic/core/units.hpp"

namespace haptic::psychophysics {

enum class TrialKind {
  test,        ///< reference paired with a test pressure
  bias_probe,  ///< reference paired with itself; no correct answer
};

/// One two-interval comparison. Intervals are presented in order; the
/// subject answers which felt higher.
struct Trial {
  int id = 0;
  Pressure first;
  Pressure second;
  TrialKind kind = TrialKind::test;
  /// Which interval carried the test pressure (test trials only).
  bool test_is_second = false;

  Pressure test_pressure() const { return test_is_second ? second : first; }
};

class TrialSchedule {
 public:
  TrialSchedule(Pressure reference, std::vector<Trial> trials, int reps_per_test);

  Pressure reference() const noexcept { return reference_; }
  std::span<const Trial> trials() const noexcept { return trials_; }
  int reps_per_test() const noexcept { return reps_; }
  std::size_t size() const noexcept { return trials_.size(); }

  const Trial* find(int trial_id) const noexcept;

 private:
  Pressure reference_;
  std::vector<Trial> trials_;
  int reps_ = 0;
};

/// Builds the randomised forced-choice schedule: every test pressure paired
/// with the reference `reps` times, plus `bias_reps` reference-vs-reference
/// probes. Both the trial order and the order within each pair come from
/// `seed`. Trial ids are 1-based and follow presentation order.
TrialSchedule build_schedule(Pressure reference, std::span<const Pressure> tests, int reps,
                             int bias_reps, Seed seed);

struct Response {
  int trial_id = 0;
  bool chose_second = false;
};

/// Answers recorded against a schedule. At most one response per trial and
/// no responses for unknown trials.
class ResponseLedger {
 public:
  explicit ResponseLedger(TrialSchedule schedule);

  void record(int trial_id, bool chose_second);

  const TrialSchedule& schedule() const noexcept { return schedule_; }
  std::optional<bool> response(int trial_id) const;
  bool complete() const noexcept;
  std::size_t answered() const noexcept { return answered_; }

  /// Responses in presentation order (unanswered trials skipped).
  std::vector<Response> responses() const;

 private:
  TrialSchedule schedule_;
  std::vector<std::optional<bool>> answers_;  // indexed like schedule trials
  std::size_t answered_ = 0;
};

/// Simulated subject whose probability of picking the test pressure follows
/// the logistic psychometric curve with steepness `k`. Bias probes are
/// answered "second" with probability `p_second_on_probe`.
ResponseLedger simulate_responses(const TrialSchedule& schedule, double k, Rng& rng,
                                  double p_second_on_probe = 0.5);

/// The pressures used in the original perception study (psi).
std::vector<Pressure> standard_test_pressures();
inline Pressure standard_reference() { return Pressure::psi(2.0); }

}  // namespace haptic::psychophysics
