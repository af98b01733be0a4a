#include "haptic/learner/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "haptic/core/error.hpp"

namespace haptic::learner {
namespace {

constexpr int kFeatures = 3;
constexpr int kActions = 2;
constexpr double kMinCalibration = 1e-12;

// A constant input row keeps unit scale so off-distribution queries stay
// bounded; a constant output row is scaled relative to its magnitude so the
// residual optimiser noise stays small next to the value itself.
Standardizer fit_standardizer(const Eigen::MatrixXd& data, bool outputs) {
  Standardizer s;
  s.mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - s.mean;
  s.scale = (centered.array().square().rowwise().sum() / static_cast<double>(data.cols())).sqrt();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
    if (!(s.scale(i) > 1e-9)) {
      s.scale(i) = outputs ? std::max(1e-3 * std::abs(s.mean(i)), 1e-9) : 1.0;
    }
  }
  return s;
}

void to_matrices(const TrainingSet& data, Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
  const auto n = static_cast<Eigen::Index>(data.size());
  x.resize(kFeatures, n);
  y.resize(kActions, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TrainingPair& p = data.pairs[static_cast<std::size_t>(i)];
    x.col(i) = pose_features(p.pose);
    y(0, i) = p.action.x;
    y(1, i) = p.action.y;
  }
}

void fit_member(Mlp& member, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int epochs,
                double learning_rate, std::size_t index) {
  Eigen::VectorXd theta = member.parameters();
  Eigen::VectorXd gradient;
  AdamState adam;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double loss = member.loss_and_gradient(x, y, gradient);
    if (!std::isfinite(loss) || !gradient.allFinite()) {
      std::ostringstream msg;
      msg << "member " << index << " diverged at epoch " << epoch << " (loss " << loss
          << ", learning rate " << learning_rate << ", " << x.cols() << " samples)";
      throw Error(ErrorCode::divergent_loss, msg.str());
    }
    adam_update(theta, gradient, adam, learning_rate);
    member.set_parameters(theta);
  }
}

Rng member_stream(Seed seed, std::size_t member, bool identical) {
  return Rng(seed).split(streams::init).split(identical ? 0 : member);
}

double calibrate(const Ensemble& e, const TrainingSet& data, double pct) {
  std::vector<double> raw;
  raw.reserve(data.size());
  for (const TrainingPair& p : data.pairs) raw.push_back(e.raw_disagreement(p.pose));
  return std::max(percentile(std::move(raw), pct), kMinCalibration);
}

}  // namespace

void EnsembleConfig::validate() const {
  if (members < 2) throw Error(ErrorCode::invalid_argument, "ensemble needs at least 2 members");
  if (epochs < 0 || fine_tune_epochs < 0) throw Error(ErrorCode::invalid_argument, "negative epochs");
  if (!(learning_rate > 0.0 && fine_tune_learning_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "learning rate must be positive");
  if (!(calibration_percentile > 0.0 && calibration_percentile <= 100.0)) {
    throw Error(ErrorCode::invalid_argument, "calibration percentile must be in (0, 100]");
  }
  for (int h : hidden) {
    if (h <= 0) throw Error(ErrorCode::invalid_argument, "hidden layer width must be positive");
  }
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  return (x.colwise() - mean).array().colwise() / scale.array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& z) const {
  return (z.array().colwise() * scale.array()).matrix().colwise() + mean;
}

Eigen::VectorXd pose_features(const Pose& pose) {
  Eigen::VectorXd f(kFeatures);
  f << pose.position().x, pose.position().y, pose.path_parameter();
  return f;
}

Ensemble::Ensemble(std::vector<Mlp> members, Standardizer inputs, Standardizer outputs, double u_cal,
                   Seed seed, EnsembleConfig config)
    : members_(std::move(members)),
      inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      u_cal_(u_cal),
      seed_(seed),
      config_(std::move(config)) {
  if (members_.size() < 2) throw Error(ErrorCode::invalid_argument, "ensemble needs at least 2 members");
  for (const Mlp& m : members_) {
    if (m.inputs() != kFeatures || m.outputs() != kActions) {
      throw Error(ErrorCode::invalid_argument, "member dimensionality mismatch");
    }
  }
  if (!(u_cal_ > 0.0)) throw Error(ErrorCode::invalid_argument, "u_cal must be positive");
}

std::vector<Vec2> Ensemble::member_predictions(const Pose& pose) const {
  const Eigen::MatrixXd z = inputs_.apply(pose_features(pose));
  std::vector<Vec2> out;
  out.reserve(members_.size());
  for (const Mlp& m : members_) {
    const Eigen::MatrixXd a = outputs_.invert(m.forward(z));
    out.push_back(Vec2{a(0, 0), a(1, 0)});
  }
  return out;
}

Vec2 Ensemble::predict(const Pose& pose) const {
  Vec2 sum;
  const auto preds = member_predictions(pose);
  for (const Vec2& p : preds) sum = sum + p;
  return (1.0 / static_cast<double>(preds.size())) * sum;
}

double Ensemble::raw_disagreement(const Pose& pose) const {
  const auto preds = member_predictions(pose);
  const double n = static_cast<double>(preds.size());
  Vec2 mean;
  for (const Vec2& p : preds) mean = mean + p;
  mean = (1.0 / n) * mean;
  double vx = 0.0;
  double vy = 0.0;
  for (const Vec2& p : preds) {
    vx += (p.x - mean.x) * (p.x - mean.x);
    vy += (p.y - mean.y) * (p.y - mean.y);
  }
  return 0.5 * (std::sqrt(vx / n) + std::sqrt(vy / n));
}

UncertaintyLevel Ensemble::uncertainty(const Pose& pose) const {
  return UncertaintyLevel::clamp(raw_disagreement(pose) / u_cal_);
}

double Ensemble::mean_uncertainty(std::span<const Pose> poses) const {
  if (poses.empty()) throw Error(ErrorCode::invalid_argument, "empty probe");
  double sum = 0.0;
  for (const Pose& p : poses) sum += uncertainty(p).value();
  return sum / static_cast<double>(poses.size());
}

Ensemble train(const TrainingSet& data, const EnsembleConfig& config, Seed seed) {
  config.validate();
  if (data.empty()) throw Error(ErrorCode::empty_training_set, "training set is empty");
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  to_matrices(data, x, y);
  Standardizer in = fit_standardizer(x, false);
  Standardizer out = fit_standardizer(y, true);
  const Eigen::MatrixXd xs = in.apply(x);
  const Eigen::MatrixXd ys = out.apply(y);

  std::vector<Mlp> members;
  members.reserve(static_cast<std::size_t>(config.members));
  for (int i = 0; i < config.members; ++i) {
    Rng init = member_stream(seed, static_cast<std::size_t>(i), config.identical_seeds);
    Mlp m(kFeatures, config.hidden, kActions, init);
    fit_member(m, xs, ys, config.epochs, config.learning_rate, static_cast<std::size_t>(i));
    members.push_back(std::move(m));
  }
  Ensemble e(std::move(members), std::move(in), std::move(out), 1.0, seed, config);
  const double u_cal = calibrate(e, data, config.calibration_percentile);
  return Ensemble(e.members(), e.input_standardizer(), e.output_standardizer(), u_cal, seed, config);
}

Ensemble retrain(const Ensemble& before, const TrainingSet& data) {
  if (data.empty()) throw Error(ErrorCode::empty_training_set, "training set is empty");
  const EnsembleConfig& config = before.config();
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  to_matrices(data, x, y);
  const Eigen::MatrixXd xs = before.input_standardizer().apply(x);
  const Eigen::MatrixXd ys = before.output_standardizer().apply(y);

  std::vector<Mlp> members;
  members.reserve(before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (config.full_retrain) {
      Rng init = member_stream(before.seed(), i, config.identical_seeds);
      Mlp m(kFeatures, config.hidden, kActions, init);
      fit_member(m, xs, ys, config.epochs, config.learning_rate, i);
      members.push_back(std::move(m));
    } else {
      Mlp m = before.members()[i];
      fit_member(m, xs, ys, config.fine_tune_epochs, config.fine_tune_learning_rate, i);
      members.push_back(std::move(m));
    }
  }
  return Ensemble(std::move(members), before.input_standardizer(), before.output_standardizer(),
                  before.u_cal(), before.seed(), config);
}

double improvement(const Ensemble& before, const Ensemble& after, std::span<const Pose> probe) {
  if (probe.empty()) throw Error(ErrorCode::invalid_argument, "empty probe");
  const double u_before = before.mean_uncertainty(probe);
  if (!(u_before > 0.0)) {
    throw Error(ErrorCode::undefined_improvement, "learner was already certain on every probe pose");
  }
  const double u_after = after.mean_uncertainty(probe);
  return 100.0 * (u_before - u_after) / u_before;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw Error(ErrorCode::invalid_argument, "percentile of empty set");
  std::sort(values.begin(), values.end());
  const double rank = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double f = rank - static_cast<double>(lo);
  return values[lo] + f * (values[hi] - values[lo]);
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) {
      throw Error(ErrorCode::parse_error, "ragged matrix in checkpoint");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

nlohmann::json to_json(const Ensemble& e) {
  const EnsembleConfig& c = e.config();
  nlohmann::json members = nlohmann::json::array();
  for (const Mlp& m : e.members()) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < m.weights().size(); ++l) {
      layers.push_back({{"weights", matrix_json(m.weights()[l])}, {"bias", vector_json(m.biases()[l])}});
    }
    members.push_back({{"layers", layers}});
  }
  return {{"format", "haptic-ensemble/1"},
          {"architecture",
           {{"inputs", kFeatures}, {"hidden", c.hidden}, {"outputs", kActions}, {"activation", "tanh"}}},
          {"training",
           {{"seed", e.seed().value},
            {"members", c.members},
            {"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"fine_tune_epochs", c.fine_tune_epochs},
            {"fine_tune_learning_rate", c.fine_tune_learning_rate},
            {"full_retrain", c.full_retrain},
            {"identical_seeds", c.identical_seeds},
            {"calibration_percentile", c.calibration_percentile}}},
          {"u_cal", e.u_cal()},
          {"input_standardizer",
           {{"mean", vector_json(e.input_standardizer().mean)},
            {"scale", vector_json(e.input_standardizer().scale)}}},
          {"output_standardizer",
           {{"mean", vector_json(e.output_standardizer().mean)},
            {"scale", vector_json(e.output_standardizer().scale)}}},
          {"members", members}};
}

Ensemble ensemble_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "haptic-ensemble/1") {
      throw Error(ErrorCode::parse_error, "unknown checkpoint format");
    }
    const auto& t = j.at("training");
    EnsembleConfig c;
    c.hidden = j.at("architecture").at("hidden").get<std::vector<int>>();
    c.members = t.at("members").get<int>();
    c.epochs = t.at("epochs").get<int>();
    c.learning_rate = t.at("learning_rate").get<double>();
    c.fine_tune_epochs = t.at("fine_tune_epochs").get<int>();
    c.fine_tune_learning_rate = t.at("fine_tune_learning_rate").get<double>();
    c.full_retrain = t.at("full_retrain").get<bool>();
    c.identical_seeds = t.at("identical_seeds").get<bool>();
    c.calibration_percentile = t.at("calibration_percentile").get<double>();

    std::vector<Mlp> members;
    for (const auto& mj : j.at("members")) {
      std::vector<Eigen::MatrixXd> weights;
      std::vector<Eigen::VectorXd> biases;
      for (const auto& layer : mj.at("layers")) {
        weights.push_back(matrix_from_json(layer.at("weights")));
        biases.push_back(vector_from_json(layer.at("bias")));
      }
      Mlp m;
      m.set_layers(std::move(weights), std::move(biases));
      members.push_back(std::move(m));
    }
    Standardizer in{vector_from_json(j.at("input_standardizer").at("mean")),
                    vector_from_json(j.at("input_standardizer").at("scale"))};
    Standardizer out{vector_from_json(j.at("output_standardizer").at("mean")),
                     vector_from_json(j.at("output_standardizer").at("scale"))};
    return Ensemble(std::move(members), std::move(in), std::move(out), j.at("u_cal").get<double>(),
                    Seed{t.at("seed").get<std::uint64_t>()}, c);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace haptic::learner
