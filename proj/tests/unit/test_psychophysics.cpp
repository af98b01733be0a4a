#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "haptic/core/error.hpp"
#include "haptic/psychophysics/cohort.hpp"
#include "haptic/psychophysics/fit.hpp"
#include "haptic/psychophysics/io.hpp"
#include "haptic/psychophysics/schedule.hpp"
#include "oracles.hpp"

using namespace haptic;
using namespace haptic::psychophysics;

namespace {

const Pressure kRef = Pressure::psi(2.0);

std::vector<DataPoint> exact_points(double k) {
  std::vector<DataPoint> pts;
  for (double p : oracle::kTestPressures) {
    pts.push_back({Pressure::psi(p), oracle::sigmoid_percent(p, 2.0, k), 10});
  }
  return pts;
}

std::vector<oracle::Point> to_oracle(const std::vector<DataPoint>& pts) {
  std::vector<oracle::Point> out;
  for (const auto& d : pts) out.push_back({d.pressure.psi(), d.q_percent});
  return out;
}

ResponseLedger answer_all(const TrialSchedule& s, bool chose_second) {
  ResponseLedger l(s);
  for (const Trial& t : s.trials()) l.record(t.id, chose_second);
  return l;
}

}  // namespace

// ---- schedule ----

TEST(Schedule, SeventyPairs) {
  const auto tests = standard_test_pressures();
  const auto s = build_schedule(kRef, tests, 10, 0, Seed{1});
  EXPECT_EQ(s.size(), 70u);
}

TEST(Schedule, ZeroReps) {
  const std::vector<Pressure> tests = {Pressure::psi(2.5)};
  EXPECT_EQ(build_schedule(Pressure::psi(1.2), tests, 0, 0, Seed{1}).size(), 0u);
}

TEST(Schedule, PairCountsAndOrderByEnumeration) {
  const std::vector<Pressure> tests = {Pressure::psi(2.5)};
  std::set<int> first_counts;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto s = build_schedule(kRef, tests, 10, 0, Seed{seed});
    int containing = 0;
    int first = 0;
    for (const Trial& t : s.trials()) {
      const bool has = t.first == Pressure::psi(2.5) || t.second == Pressure::psi(2.5);
      containing += has ? 1 : 0;
      first += t.first == Pressure::psi(2.5) ? 1 : 0;
      // exactly one interval is the reference
      EXPECT_NE(t.first == kRef, t.second == kRef);
    }
    EXPECT_EQ(containing, 10);
    EXPECT_GE(first, 0);
    EXPECT_LE(first, 10);
    first_counts.insert(first);
  }
  EXPECT_GT(first_counts.size(), 2u);  // order actually depends on the seed
}

TEST(Schedule, CompletenessAcrossSeeds) {
  const auto tests = standard_test_pressures();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = build_schedule(kRef, tests, 10, 4, Seed{seed});
    std::map<double, int> count;
    int probes = 0;
    std::set<int> ids;
    for (const Trial& t : s.trials()) {
      ids.insert(t.id);
      if (t.kind == TrialKind::bias_probe) {
        ++probes;
        EXPECT_EQ(t.first, kRef);
        EXPECT_EQ(t.second, kRef);
      } else {
        ++count[t.test_pressure().psi()];
      }
    }
    EXPECT_EQ(probes, 4);
    EXPECT_EQ(ids.size(), s.size());
    for (double p : oracle::kTestPressures) EXPECT_EQ(count[p], 10) << p;
  }
}

TEST(Schedule, RejectsOutOfRange) {
  const std::vector<Pressure> bad = {Pressure::psi(3.6)};
  EXPECT_THROW(build_schedule(kRef, bad, 1, 0, Seed{1}), Error);
  const std::vector<Pressure> zero = {Pressure::psi(0.0)};
  EXPECT_THROW(build_schedule(kRef, zero, 1, 0, Seed{1}), Error);
}

TEST(Ledger, OneResponsePerTrial) {
  const std::vector<Pressure> tests = {Pressure::psi(2.5)};
  ResponseLedger l(build_schedule(kRef, tests, 2, 0, Seed{1}));
  l.record(1, true);
  EXPECT_THROW(l.record(1, false), Error);
  EXPECT_THROW(l.record(99, false), Error);
  EXPECT_FALSE(l.complete());
  l.record(2, false);
  EXPECT_TRUE(l.complete());
}

// ---- tally ----

TEST(Tally, Unanimous) {
  const std::vector<Pressure> tests = {Pressure::psi(2.5)};
  const auto s = build_schedule(kRef, tests, 10, 0, Seed{3});
  ResponseLedger l(s);
  for (const Trial& t : s.trials()) l.record(t.id, t.test_is_second);
  const auto pts = tally(l);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].pressure, Pressure::psi(2.5));
  EXPECT_EQ(pts[0].q_percent, 100.0);
}

TEST(Tally, ReferenceAsTestValueSplitsEvenly) {
  const std::vector<Pressure> tests = {Pressure::psi(2.0)};
  const auto s = build_schedule(kRef, tests, 10, 0, Seed{3});
  ResponseLedger l(s);
  int n = 0;
  for (const Trial& t : s.trials()) {
    const bool pick_test = n++ < 5;
    l.record(t.id, pick_test ? t.test_is_second : !t.test_is_second);
  }
  const auto pts = tally(l);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].q_percent, 50.0);
}

TEST(Tally, MatchesBernoulliOracleCounts) {
  const auto tests = standard_test_pressures();
  const auto s = build_schedule(kRef, tests, 10, 0, Seed{8});
  // Replay the simulator's stream by hand: one draw per trial in order.
  Rng sim = Rng(Seed{8}).split(streams::responses);
  Rng replay = Rng(Seed{8}).split(streams::responses);
  const ResponseLedger l = simulate_responses(s, oracle::kPooledK, sim);
  std::map<double, int> chosen;
  for (const Trial& t : s.trials()) {
    const double q = oracle::sigmoid_percent(t.test_pressure().psi(), 2.0, oracle::kPooledK) / 100.0;
    const bool test_higher = replay.bernoulli(q);
    chosen[t.test_pressure().psi()] += test_higher ? 1 : 0;
  }
  for (const DataPoint& d : tally(l)) {
    EXPECT_EQ(d.trials, 10);
    EXPECT_DOUBLE_EQ(d.q_percent, 100.0 * chosen[d.pressure.psi()] / 10.0) << d.pressure.psi();
  }
}

TEST(Tally, IncompleteLedger) {
  const std::vector<Pressure> tests = {Pressure::psi(2.5)};
  ResponseLedger l(build_schedule(kRef, tests, 2, 0, Seed{1}));
  l.record(1, true);
  try {
    (void)tally(l);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::incomplete_ledger);
  }
}

// ---- fit ----

TEST(Fit, InvertsExactData) {
  EXPECT_NEAR(fit_sigmoid(exact_points(4.678), kRef).k, 4.678, 1e-4);
  EXPECT_NEAR(fit_sigmoid(exact_points(11.15), kRef).k, 11.15, 1e-3);
  EXPECT_FALSE(fit_sigmoid(exact_points(4.678), kRef).saturated);
}

TEST(Fit, SaturatedDataHitsUpperBound) {
  const std::vector<DataPoint> pts = {{Pressure::psi(1.5), 0.0, 10}, {Pressure::psi(2.5), 100.0, 10}};
  const auto f = fit_sigmoid(pts, kRef);
  EXPECT_TRUE(f.saturated);
  EXPECT_NEAR(f.k, 100.0, 1e-6);
}

TEST(Fit, NoInformation) {
  const std::vector<DataPoint> at_ref = {{kRef, 50.0, 10}};
  try {
    (void)fit_sigmoid(at_ref, kRef);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_information);
  }
  EXPECT_THROW(fit_sigmoid(std::vector<DataPoint>{}, kRef), Error);
}

TEST(Fit, CurvePinnedAtReferenceAndMonotone) {
  const auto f = fit_sigmoid(exact_points(5.0), kRef);
  EXPECT_EQ(f.model_percent(kRef), 50.0);
  double prev = -1.0;
  for (double p = 1.0; p <= 3.0; p += 0.01) {
    const double q = psychometric_percent(p, 2.0, f.k);
    EXPECT_GT(q, prev);
    prev = q;
  }
}

TEST(Fit, MatchesGridSearchOracle) {
  Rng rng(Seed{2024});
  for (int i = 0; i < 5; ++i) {
    const double k = std::exp(rng.uniform(std::log(1.0), std::log(20.0)));
    std::vector<DataPoint> pts;
    for (double p : oracle::kTestPressures) {
      const double q = oracle::sigmoid_percent(p, 2.0, k) + rng.normal(0.0, 8.0);
      pts.push_back({Pressure::psi(p), std::clamp(q, 0.0, 100.0), 10});
    }
    const double grid = oracle::grid_search_k(to_oracle(pts), 2.0);
    EXPECT_NEAR(fit_sigmoid(pts, kRef).k, grid, 1e-4) << "dataset " << i;
  }
}

TEST(Fit, GoldenSectionOnParabola) {
  const double x = golden_section_minimize([](double v) { return (v - 0.3) * (v - 0.3); }, -1.0, 2.0, 1e-10);
  EXPECT_NEAR(x, 0.3, 1e-8);
}

// ---- jnd ----

TEST(Jnd, PooledValues) {
  const auto pooled = jnd_from_k(4.678, kRef);
  EXPECT_NEAR(pooled.jnd.psi(), 0.235, 0.001);
  EXPECT_NEAR(pooled.weber_fraction, 11.74, 0.05);
  const auto s2 = jnd_from_k(11.15, kRef);
  EXPECT_NEAR(s2.jnd.psi(), 0.099, 0.001);
  EXPECT_NEAR(s2.weber_fraction, 4.927, 0.01);
}

TEST(Jnd, LnThreeGivesOne) {
  const auto r = jnd_from_k(std::log(3.0), kRef);
  EXPECT_DOUBLE_EQ(r.jnd.psi(), 1.0);
  EXPECT_DOUBLE_EQ(r.p75.psi(), 3.0);
  EXPECT_DOUBLE_EQ(r.weber_fraction, 50.0);
}

TEST(Jnd, ReferenceCohortRows) {
  for (std::size_t i = 0; i < oracle::kCohortK.size(); ++i) {
    const auto r = jnd_from_k(oracle::kCohortK[i], kRef);
    EXPECT_NEAR(r.jnd.psi(), oracle::kCohortJnd[i], 0.001) << "subject " << i + 1;
    EXPECT_NEAR(r.weber_fraction, oracle::kCohortWeber[i], 0.01) << "subject " << i + 1;
  }
}

TEST(Jnd, InversionIdentity) {
  for (double k = 0.05; k < 100.0; k *= 1.37) {
    const auto r = jnd_from_k(k, kRef);
    EXPECT_NEAR(std::log(3.0) / r.jnd.psi(), k, 1e-12 * std::max(1.0, k));
    EXPECT_NEAR(r.p75.psi() - 2.0, r.jnd.psi(), 1e-15);
    EXPECT_GT(r.jnd.psi(), 0.0);
  }
}

TEST(Jnd, NonPositiveK) {
  EXPECT_THROW(jnd_from_k(0.0, kRef), Error);
  EXPECT_THROW(jnd_from_k(-1.0, kRef), Error);
}

// ---- bias ----

TEST(Bias, AllFirst) {
  const std::vector<Pressure> tests = {Pressure::psi(2.5)};
  const auto l = answer_all(build_schedule(kRef, tests, 1, 10, Seed{4}), false);
  const auto b = bias_report(l);
  EXPECT_EQ(b.first_pct, 100.0);
  EXPECT_EQ(b.second_pct, 0.0);
  EXPECT_EQ(b.probes, 10);
}

TEST(Bias, EightOfTenSecond) {
  const std::vector<Pressure> tests = {Pressure::psi(2.5)};
  const auto s = build_schedule(kRef, tests, 1, 10, Seed{4});
  ResponseLedger l(s);
  int probes = 0;
  for (const Trial& t : s.trials()) {
    if (t.kind == TrialKind::bias_probe) {
      l.record(t.id, probes++ < 8);
    } else {
      l.record(t.id, true);
    }
  }
  const auto b = bias_report(l);
  EXPECT_DOUBLE_EQ(b.first_pct, 20.0);
  EXPECT_DOUBLE_EQ(b.second_pct, 80.0);
}

TEST(Bias, PooledFortyFiveFiftyFive) {
  // 9 of 20 probes "first" across two ledgers.
  const std::vector<Pressure> tests = {Pressure::psi(2.5)};
  std::vector<ResponseLedger> ledgers;
  for (int sub = 0; sub < 2; ++sub) {
    const auto s = build_schedule(kRef, tests, 1, 10, Seed{static_cast<std::uint64_t>(sub + 10)});
    ResponseLedger l(s);
    int probes = 0;
    for (const Trial& t : s.trials()) {
      const int firsts = sub == 0 ? 5 : 4;
      l.record(t.id, t.kind == TrialKind::bias_probe ? probes++ >= firsts : true);
    }
    ledgers.push_back(std::move(l));
  }
  const auto b = bias_report(std::span<const ResponseLedger>(ledgers));
  EXPECT_DOUBLE_EQ(b.first_pct, 45.0);
  EXPECT_DOUBLE_EQ(b.second_pct, 55.0);
  EXPECT_EQ(b.probes, 20);
}

TEST(Bias, NoProbes) {
  const std::vector<Pressure> tests = {Pressure::psi(2.5)};
  const auto l = answer_all(build_schedule(kRef, tests, 2, 0, Seed{4}), true);
  EXPECT_THROW(bias_report(l), Error);
}

// ---- cohort ----

TEST(Cohort, CohortRowsAndSingleton) {
  std::vector<PsychometricFit> fits;
  for (double k : {5.048, 2.478}) {
    PsychometricFit f;
    f.k = k;
    f.reference = kRef;
    fits.push_back(f);
  }
  const auto c = aggregate(fits, kRef);
  ASSERT_EQ(c.rows.size(), 2u);
  EXPECT_NEAR(c.rows[0].jnd_psi, 0.218, 0.001);
  EXPECT_NEAR(c.rows[0].weber_pct, 10.88, 0.01);
  EXPECT_NEAR(c.rows[1].jnd_psi, 0.443, 0.001);
  EXPECT_NEAR(c.rows[1].weber_pct, 22.17, 0.01);
  EXPECT_FALSE(c.pooled.has_value());

  PsychometricFit one;
  one.k = std::log(3.0);
  one.reference = kRef;
  const std::vector<PsychometricFit> single = {one};
  const auto s = aggregate(single, kRef);
  EXPECT_DOUBLE_EQ(s.mean.jnd_psi, 1.0);
  EXPECT_EQ(s.stdev.jnd_psi, 0.0);
}

TEST(Cohort, ArithmeticMeanOfCohortRows) {
  std::vector<PsychometricFit> fits;
  for (double k : oracle::kCohortK) {
    PsychometricFit f;
    f.k = k;
    f.reference = kRef;
    fits.push_back(f);
  }
  const auto c = aggregate(fits, kRef);
  double sum_k = 0.0;
  double sum_jnd = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    sum_k += oracle::kCohortK[i];
    sum_jnd += std::log(3.0) / oracle::kCohortK[i];
  }
  EXPECT_NEAR(c.mean.k, sum_k / 10.0, 1e-12);
  EXPECT_NEAR(c.mean.jnd_psi, sum_jnd / 10.0, 1e-12);
  // the reference Mean row is not the arithmetic mean of the rows
  EXPECT_NEAR(c.mean.k, 5.32, 0.01);
  EXPECT_NEAR(c.mean.jnd_psi, 0.251, 0.001);
}

TEST(Cohort, PooledFitUsesAllPoints) {
  std::vector<PsychometricFit> fits;
  for (double k : {3.0, 6.0}) fits.push_back(fit_sigmoid(exact_points(k), kRef));
  const auto c = aggregate(fits, kRef);
  ASSERT_TRUE(c.pooled_fit.has_value());
  EXPECT_EQ(c.pooled_fit->points.size(), 14u);
  EXPECT_GT(c.pooled->k, 3.0);
  EXPECT_LT(c.pooled->k, 6.0);
}

// ---- csv ----

TEST(Csv, RoundTrip) {
  const auto s = build_schedule(kRef, standard_test_pressures(), 10, 4, Seed{9});
  Rng rng(Seed{9});
  const auto l = simulate_responses(s, 4.678, rng);
  std::stringstream buf;
  write_response_csv(buf, l);
  const auto back = read_response_csv(buf, kRef);
  EXPECT_EQ(back.answered(), l.answered());
  // Reference-vs-reference rows read back as bias probes, so the P = P0 test
  // point drops out; it carries no information about k.
  std::vector<DataPoint> a;
  for (const DataPoint& d : tally(l)) {
    if (d.pressure != kRef) a.push_back(d);
  }
  const auto b = tally(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].pressure, b[i].pressure);
    EXPECT_EQ(a[i].q_percent, b[i].q_percent);
  }
  EXPECT_NEAR(fit_sigmoid(tally(l), kRef).k, fit_sigmoid(b, kRef).k, 1e-9);
}

TEST(Csv, LineNumberedDiagnostics) {
  std::stringstream in("trial_id,first_psi,second_psi,chose_second\n1,2.0,2.5,1\n2,2.0,abc,0\n");
  try {
    (void)read_response_csv(in, kRef);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, RowWithoutReference) {
  std::stringstream in("trial_id,first_psi,second_psi,chose_second\n1,1.5,2.5,1\n");
  EXPECT_THROW(read_response_csv(in, kRef), Error);
}

TEST(Csv, HeaderOnlyHasNoInformation) {
  std::stringstream in("trial_id,first_psi,second_psi,chose_second\n");
  const auto l = read_response_csv(in, kRef);
  try {
    (void)fit_sigmoid(tally(l), kRef);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_information);
  }
}

TEST(Report, JsonFields) {
  const auto f = fit_sigmoid(exact_points(4.678), kRef);
  const auto j = fit_report_json("s1", f);
  EXPECT_EQ(j.at("subject"), "s1");
  EXPECT_NEAR(j.at("jnd_psi").get<double>(), 0.235, 0.001);
  EXPECT_NEAR(j.at("p75_psi").get<double>(), 2.235, 0.001);
  EXPECT_NEAR(j.at("weber_pct").get<double>(), 11.74, 0.05);
  EXPECT_FALSE(j.at("saturated").get<bool>());
  EXPECT_TRUE(j.contains("residual"));
}

TEST(Report, CurveResolution) {
  const auto f = fit_sigmoid(exact_points(4.678), kRef);
  std::stringstream out;
  write_curve_csv(out, f, 1.5, 2.5);
  std::string line;
  std::getline(out, line);
  EXPECT_EQ(line, "pressure_psi,q_model_pct");
  int rows = 0;
  while (std::getline(out, line)) ++rows;
  EXPECT_EQ(rows, 201);
}
