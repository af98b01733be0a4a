#pragma once

#include <vector>

#include <Eigen/Dense>

#include "haptic/core/random.hpp"

namespace haptic::learner {

/// Fully connected network: tanh hidden layers, linear output.
/// Batches are column-major (one sample per column).
class Mlp {
 public:
  Mlp() = default;
  Mlp(int inputs, std::vector<int> hidden, int outputs, Rng& init);

  int inputs() const noexcept { return inputs_; }
  int outputs() const noexcept { return outputs_; }
  const std::vector<int>& hidden() const noexcept { return hidden_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  /// Mean squared error over every output entry of the batch, and its
  /// gradient with respect to the flattened parameters.
  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                           Eigen::VectorXd& gradient) const;
  double loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const;

  /// Parameters flattened layer by layer: weights (column-major) then bias.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);
  Eigen::Index parameter_count() const;

  const std::vector<Eigen::MatrixXd>& weights() const noexcept { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const noexcept { return biases_; }
  void set_layers(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases);

 private:
  int inputs_ = 0;
  int outputs_ = 0;
  std::vector<int> hidden_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Full-batch Adam on the member's own loss surface.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

void adam_update(Eigen::VectorXd& theta, const Eigen::VectorXd& gradient, AdamState& state,
                 double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                 double epsilon = 1e-8);

}  // namespace haptic::learner
