#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "haptic/core/random.hpp"
#include "haptic/core/types.hpp"
#include "haptic/learner/dataset.hpp"
#include "haptic/learner/mlp.hpp"

namespace haptic::learner {

struct EnsembleConfig {
  int members = 5;
  std::vector<int> hidden = {32};
  int epochs = 1000;
  double learning_rate = 0.01;
  /// Epochs used when an existing ensemble absorbs new data.
  int fine_tune_epochs = 1000;
  double fine_tune_learning_rate = 0.01;
  /// Retrain from fresh initialisations instead of fine-tuning.
  bool full_retrain = false;
  /// Give every member the same initialisation stream (degenerate ensemble).
  bool identical_seeds = false;
  double calibration_percentile = 95.0;

  void validate() const;
};

/// Per-feature affine standardisation learned from the first training set.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;
};

/// Independently initialised behaviour-cloning regressors over pose
/// features (x, y, s). Disagreement between members is the learner's
/// uncertainty; `u_cal` maps raw disagreement onto [0, 1].
class Ensemble {
 public:
  Ensemble(std::vector<Mlp> members, Standardizer inputs, Standardizer outputs, double u_cal,
           Seed seed, EnsembleConfig config);

  std::size_t size() const noexcept { return members_.size(); }
  const std::vector<Mlp>& members() const noexcept { return members_; }
  const Standardizer& input_standardizer() const noexcept { return inputs_; }
  const Standardizer& output_standardizer() const noexcept { return outputs_; }
  double u_cal() const noexcept { return u_cal_; }
  Seed seed() const noexcept { return seed_; }
  const EnsembleConfig& config() const noexcept { return config_; }

  std::vector<Vec2> member_predictions(const Pose& pose) const;
  Vec2 predict(const Pose& pose) const;
  /// Mean over action dimensions of the across-member standard deviation.
  double raw_disagreement(const Pose& pose) const;
  UncertaintyLevel uncertainty(const Pose& pose) const;

  double mean_uncertainty(std::span<const Pose> poses) const;

 private:
  std::vector<Mlp> members_;
  Standardizer inputs_;
  Standardizer outputs_;
  double u_cal_ = 1.0;
  Seed seed_;
  EnsembleConfig config_;
};

Eigen::VectorXd pose_features(const Pose& pose);

/// Trains each member by full-batch gradient descent on the mean squared
/// action error from its own seeded initialisation, then calibrates `u_cal`
/// to the configured percentile of raw disagreement over the training poses.
/// Throws `divergent_loss` if a loss turns non-finite.
Ensemble train(const TrainingSet& data, const EnsembleConfig& config, Seed seed);

/// Continues training `before` on `data` (normally the old set plus new
/// samples). Standardisers and `u_cal` carry over so uncertainties stay
/// comparable. With `config.full_retrain` the members restart from fresh
/// initialisations instead.
Ensemble retrain(const Ensemble& before, const TrainingSet& data);

/// Percentage reduction in mean uncertainty over the probe poses. Negative
/// when uncertainty grew. Throws `undefined_improvement` if `before` is
/// already certain everywhere on the probe.
double improvement(const Ensemble& before, const Ensemble& after, std::span<const Pose> probe);

/// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double pct);

/// Self-describing checkpoint: architecture, weights, standardisers, u_cal,
/// seed and training config.
nlohmann::json to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const nlohmann::json& j);

}  // namespace haptic::learner
