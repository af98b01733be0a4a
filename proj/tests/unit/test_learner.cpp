#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "haptic/core/error.hpp"
#include "haptic/learner/dataset.hpp"
#include "haptic/learner/ensemble.hpp"
#include "haptic/learner/mlp.hpp"
#include "haptic/session/metrics.hpp"
#include "haptic/session/task.hpp"
#include "haptic/session/teacher.hpp"

using namespace haptic;
using namespace haptic::learner;

namespace {

EnsembleConfig small_config() {
  EnsembleConfig c;
  c.members = 4;
  c.hidden = {16};
  c.epochs = 600;
  c.learning_rate = 0.01;
  c.fine_tune_epochs = 200;
  return c;
}

TrainingSet synthetic_set(int n, Rng& rng, auto&& action_of) {
  TrainingSet set;
  for (int i = 0; i < n; ++i) {
    const double s = rng.uniform();
    const Pose pose(Vec2{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}, s);
    set.pairs.push_back({pose, action_of(pose), 1});
  }
  set.provenance = {1};
  return set;
}

std::vector<Demonstration> cleaning_demos(std::uint64_t seed) {
  Rng rng = Rng(Seed{seed}).split(streams::demos);
  return session::expert_demonstrations(session::cleaning_task(), 5, rng);
}

}  // namespace

// ---- dataset ----

TEST(TrainingSet, SegmentRemoval) {
  const auto task = session::cleaning_task();
  const auto demos = cleaning_demos(1);
  const auto set = make_training_set(demos, {1}, task);
  for (const auto& p : set.pairs) {
    EXPECT_NE(task.segment_of(p.pose.path_parameter()), 1);
    EXPECT_EQ(p.segment_id, task.segment_of(p.pose.path_parameter()));
  }
  EXPECT_EQ(set.provenance, (std::vector<int>{2, 3}));
}

TEST(TrainingSet, NoRemovalConcatenates) {
  const auto task = session::cleaning_task();
  const auto demos = cleaning_demos(2);
  const auto set = make_training_set(demos, {}, task);
  std::size_t total = 0;
  for (const auto& d : demos) total += d.size();
  ASSERT_EQ(set.size(), total);
  std::size_t i = 0;
  for (const auto& d : demos) {
    for (const auto& s : d.samples()) {
      EXPECT_EQ(set.pairs[i].pose, s.pose);
      EXPECT_EQ(set.pairs[i].action, s.action);
      ++i;
    }
  }
}

TEST(TrainingSet, RemovingEverythingFails) {
  const auto task = session::cleaning_task();
  const auto demos = cleaning_demos(3);
  try {
    (void)make_training_set(demos, {1, 2, 3}, task);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_training_set);
  }
  EXPECT_THROW(make_training_set(demos, {9}, task), Error);
}

TEST(TrainingSet, AppendConserves) {
  const auto task = session::cleaning_task();
  const auto demos = cleaning_demos(4);
  const auto base = make_training_set(demos, {1}, task);
  const auto joined = append(base, demos[0], task);
  EXPECT_EQ(joined.size(), base.size() + demos[0].size());
  EXPECT_EQ(joined.provenance, (std::vector<int>{1, 2, 3}));
}

TEST(Demonstration, FiniteDifferenceActions) {
  const std::vector<Pose> poses = {Pose(Vec2{0, 0}, 0.0), Pose(Vec2{0.1, 0}, 0.1), Pose(Vec2{0.1, 0.2}, 0.2)};
  const std::vector<double> t = {0.0, 0.5, 1.0};
  const auto d = Demonstration::from_poses(poses, t);
  EXPECT_NEAR(d.samples()[0].action.x, 0.2, 1e-12);
  EXPECT_NEAR(d.samples()[1].action.y, 0.4, 1e-12);
  EXPECT_EQ(d.samples()[2].action, d.samples()[1].action);
  EXPECT_DOUBLE_EQ(d.teaching_time(), 1.0);
  const std::vector<double> bad = {0.0, 0.5, 0.5};
  EXPECT_THROW(Demonstration::from_poses(poses, bad), Error);
}

TEST(Demonstration, JsonLinesRoundTrip) {
  const auto demos = cleaning_demos(5);
  std::stringstream buf;
  write_demonstration_jsonl(buf, demos[0]);
  const auto back = read_demonstration_jsonl(buf);
  ASSERT_EQ(back.size(), demos[0].size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back.samples()[i].pose, demos[0].samples()[i].pose);
    EXPECT_EQ(back.samples()[i].action, demos[0].samples()[i].action);
    EXPECT_EQ(back.samples()[i].t, demos[0].samples()[i].t);
  }
}

// ---- mlp ----

TEST(Mlp, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(Seed{seed});
    Mlp net(3, {7, 5}, 2, rng);
    Eigen::MatrixXd x(3, 9);
    Eigen::MatrixXd y(2, 9);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.normal();
    Eigen::VectorXd g;
    (void)net.loss_and_gradient(x, y, g);
    const Eigen::VectorXd theta = net.parameters();
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      Mlp probe = net;
      Eigen::VectorXd t = theta;
      t(j) += h;
      probe.set_parameters(t);
      const double up = probe.loss(x, y);
      t(j) -= 2 * h;
      probe.set_parameters(t);
      const double down = probe.loss(x, y);
      const double fd = (up - down) / (2 * h);
      const double rel = std::abs(fd - g(j)) / std::max(1e-6, std::max(std::abs(fd), std::abs(g(j))));
      EXPECT_LT(rel, 1e-4) << "seed " << seed << " parameter " << j;
    }
  }
}

TEST(Mlp, ParameterRoundTrip) {
  Rng rng(Seed{3});
  Mlp net(3, {4}, 2, rng);
  EXPECT_EQ(net.parameter_count(), 3 * 4 + 4 + 4 * 2 + 2);
  Eigen::VectorXd theta = net.parameters();
  theta(0) = 0.123;
  net.set_parameters(theta);
  EXPECT_EQ(net.parameters(), theta);
  EXPECT_EQ(net.weights()[0](0, 0), 0.123);
}

// ---- ensemble ----

TEST(Ensemble, ConstantActionIsLearned) {
  Rng rng(Seed{10});
  const Vec2 c{0.3, -0.2};
  const auto set = synthetic_set(200, rng, [&](const Pose&) { return c; });
  const auto e = train(set, small_config(), Seed{1});
  const double norm = c.norm();
  for (int i = 0; i < 50; ++i) {
    const Pose pose(Vec2{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}, rng.uniform());
    for (const Vec2& p : e.member_predictions(pose)) EXPECT_LT((p - c).norm(), 0.01 * norm);
    EXPECT_LT(e.raw_disagreement(pose), 1e-3 * norm);
  }
}

TEST(Ensemble, LinearMapGeneralises) {
  Rng rng(Seed{11});
  auto f = [](const Pose& p) {
    return Vec2{0.8 * p.position().x - 0.3 * p.position().y + 0.2 * p.path_parameter(),
                0.1 * p.position().x + 0.5 * p.position().y - 0.4 * p.path_parameter()};
  };
  const auto train_set = synthetic_set(500, rng, f);
  const auto held_out = synthetic_set(200, rng, f);
  const auto e = train(train_set, small_config(), Seed{2});
  double se = 0.0;
  Vec2 mean;
  for (const auto& p : held_out.pairs) mean = mean + p.action;
  mean = (1.0 / held_out.size()) * mean;
  double var = 0.0;
  for (const auto& p : held_out.pairs) {
    const Vec2 d = e.predict(p.pose) - p.action;
    se += d.x * d.x + d.y * d.y;
    const Vec2 v = p.action - mean;
    var += v.x * v.x + v.y * v.y;
  }
  EXPECT_LT(se / var, 0.05);
}

TEST(Ensemble, IdenticalSeedsNeverDisagree) {
  Rng rng(Seed{12});
  const auto set = synthetic_set(100, rng, [](const Pose& p) { return Vec2{p.position().y, p.path_parameter()}; });
  EnsembleConfig cfg = small_config();
  cfg.identical_seeds = true;
  cfg.epochs = 100;
  const auto e = train(set, cfg, Seed{3});
  for (int i = 0; i < 50; ++i) {
    const Pose pose(Vec2{rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform());
    EXPECT_EQ(e.raw_disagreement(pose), 0.0);
    EXPECT_EQ(e.uncertainty(pose).value(), 0.0);
  }
}

TEST(Ensemble, DeterministicAndNormalised) {
  Rng rng(Seed{13});
  const auto set = synthetic_set(120, rng, [](const Pose& p) { return Vec2{std::sin(6 * p.path_parameter()), p.position().x}; });
  EnsembleConfig cfg = small_config();
  cfg.epochs = 200;
  const auto a = train(set, cfg, Seed{4});
  const auto b = train(set, cfg, Seed{4});
  EXPECT_EQ(a.u_cal(), b.u_cal());
  for (int i = 0; i < 100; ++i) {
    const Pose pose(Vec2{rng.uniform(-3, 3), rng.uniform(-3, 3)}, rng.uniform());
    EXPECT_EQ(a.raw_disagreement(pose), b.raw_disagreement(pose));
    const double u = a.uncertainty(pose).value();
    EXPECT_GE(u, 0.0);
    EXPECT_LE(u, 1.0);
  }
}

TEST(Ensemble, CalibrationIsNinetyFifthPercentile) {
  Rng rng(Seed{14});
  const auto set = synthetic_set(150, rng, [](const Pose& p) { return Vec2{p.position().x * p.position().y, 1.0}; });
  EnsembleConfig cfg = small_config();
  cfg.epochs = 150;
  const auto e = train(set, cfg, Seed{5});
  std::vector<double> raw;
  for (const auto& p : set.pairs) raw.push_back(e.raw_disagreement(p.pose));
  std::sort(raw.begin(), raw.end());
  // linear interpolation between order statistics
  const double rank = 0.95 * (raw.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const double expected = raw[lo] + (rank - lo) * (raw[lo + 1] - raw[lo]);
  EXPECT_NEAR(e.u_cal(), expected, 1e-15);
}

TEST(Ensemble, DivergenceReportsDiagnostics) {
  Rng rng(Seed{15});
  auto set = synthetic_set(20, rng, [](const Pose&) { return Vec2{1.0, 1.0}; });
  set.pairs[3].action = Vec2{std::numeric_limits<double>::infinity(), 0.0};
  try {
    (void)train(set, small_config(), Seed{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::divergent_loss);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Ensemble, EmptySet) {
  EXPECT_THROW(train(TrainingSet{}, small_config(), Seed{1}), Error);
}

TEST(Ensemble, CheckpointRoundTrip) {
  Rng rng(Seed{16});
  const auto set = synthetic_set(60, rng, [](const Pose& p) { return Vec2{p.path_parameter(), 0.0}; });
  EnsembleConfig cfg = small_config();
  cfg.epochs = 50;
  const auto e = train(set, cfg, Seed{6});
  const auto text = to_json(e).dump();
  const auto back = ensemble_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.u_cal(), e.u_cal());
  EXPECT_EQ(back.seed(), e.seed());
  for (int i = 0; i < 20; ++i) {
    const Pose pose(Vec2{rng.uniform(), rng.uniform()}, rng.uniform());
    EXPECT_EQ(back.raw_disagreement(pose), e.raw_disagreement(pose));
  }
  EXPECT_THROW(ensemble_from_json(nlohmann::json{{"format", "other"}}), Error);
}

TEST(Improvement, IdentityAndUndefined) {
  Rng rng(Seed{17});
  const auto set = synthetic_set(80, rng, [](const Pose& p) { return Vec2{p.position().x, 0.0}; });
  EnsembleConfig cfg = small_config();
  cfg.epochs = 100;
  const auto e = train(set, cfg, Seed{7});
  std::vector<Pose> probe;
  for (int i = 0; i < 30; ++i) probe.emplace_back(Vec2{rng.uniform(-2, 2), rng.uniform(-2, 2)}, rng.uniform());
  EXPECT_EQ(improvement(e, e, probe), 0.0);

  cfg.identical_seeds = true;
  const auto flat = train(set, cfg, Seed{7});
  try {
    (void)improvement(flat, flat, probe);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::undefined_improvement);
  }
  EXPECT_THROW(improvement(e, e, std::vector<Pose>{}), Error);
}

TEST(Retrain, InheritsCalibrationAndConserves) {
  const auto task = session::cleaning_task();
  const auto demos = cleaning_demos(6);
  const auto base = make_training_set(demos, {1}, task);
  EnsembleConfig cfg = small_config();
  cfg.epochs = 150;
  cfg.fine_tune_epochs = 50;
  const auto before = train(base, cfg, Seed{8});
  const auto combined = append(base, demos[1], task);
  const auto after = retrain(before, combined);
  EXPECT_EQ(after.u_cal(), before.u_cal());
  EXPECT_EQ(after.size(), before.size());
  EXPECT_EQ(combined.size(), base.size() + demos[1].size());
  cfg.full_retrain = true;
  const auto fresh_before = train(base, cfg, Seed{8});
  EXPECT_NO_THROW(retrain(fresh_before, combined));
}

// Segment-removal behaviour on the bundled task with the default learner.
TEST(SegmentRemoval, WithheldPoseMoreUncertainThanTrainedMean) {
  const auto task = session::cleaning_task();
  const auto sweep = session::uniform_sweep(task, 200);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto set = make_training_set(cleaning_demos(seed), {1}, task);
    const auto e = train(set, EnsembleConfig{}, Seed{seed});
    double trained = 0.0;
    int n = 0;
    for (const Pose& p : sweep) {
      if (task.segment_of(p.path_parameter()) != 1) {
        trained += e.uncertainty(p).value();
        ++n;
      }
    }
    trained /= n;
    const Pose inside = task.pose_at(1.0 / 6.0);
    EXPECT_GT(e.uncertainty(inside).value(), trained) << "seed " << seed;

    // a pose at a training sample mid-way through a trained segment
    const auto mid = std::min_element(set.pairs.begin(), set.pairs.end(), [](const auto& a, const auto& b) {
      return std::abs(a.pose.path_parameter() - 0.5) < std::abs(b.pose.path_parameter() - 0.5);
    });
    EXPECT_LT(e.uncertainty(mid->pose).value(), 0.5) << "seed " << seed;
  }
}
