#include "haptic/learner/mlp.hpp"

#include <cmath>

#include "haptic/core/error.hpp"

namespace haptic::learner {

Mlp::Mlp(int inputs, std::vector<int> hidden, int outputs, Rng& init)
    : inputs_(inputs), outputs_(outputs), hidden_(std::move(hidden)) {
  if (inputs <= 0 || outputs <= 0) throw Error(ErrorCode::invalid_argument, "empty layer");
  int fan_in = inputs;
  std::vector<int> sizes = hidden_;
  sizes.push_back(outputs);
  for (int width : sizes) {
    if (width <= 0) throw Error(ErrorCode::invalid_argument, "empty layer");
    // Xavier/Glorot uniform
    const double limit = std::sqrt(6.0 / (fan_in + width));
    Eigen::MatrixXd w(width, fan_in);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = init.uniform(-limit, limit);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(width));
    fan_in = width;
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  const std::size_t last = weights_.size() - 1;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
    a = l == last ? std::move(z) : Eigen::MatrixXd(z.array().tanh());
  }
  return a;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x)).col(0);
}

double Mlp::loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const {
  return (forward(x) - y).squaredNorm() / static_cast<double>(y.size());
}

double Mlp::loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                              Eigen::VectorXd& gradient) const {
  const std::size_t layers = weights_.size();
  std::vector<Eigen::MatrixXd> activations;
  activations.reserve(layers + 1);
  activations.push_back(x);
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (weights_[l] * activations.back()).colwise() + biases_[l];
    activations.push_back(l + 1 == layers ? std::move(z) : Eigen::MatrixXd(z.array().tanh()));
  }
  const Eigen::MatrixXd residual = activations.back() - y;
  const double n = static_cast<double>(y.size());
  const double loss = residual.squaredNorm() / n;

  gradient.resize(parameter_count());
  std::vector<Eigen::Index> offsets(layers);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    offset += weights_[l].size() + biases_[l].size();
  }

  Eigen::MatrixXd delta = (2.0 / n) * residual;  // dL/dz for the linear output layer
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd dw = delta * activations[l].transpose();
    const Eigen::VectorXd db = delta.rowwise().sum();
    gradient.segment(offsets[l], dw.size()) = Eigen::Map<const Eigen::VectorXd>(dw.data(), dw.size());
    gradient.segment(offsets[l] + dw.size(), db.size()) = db;
    if (l > 0) {
      const Eigen::MatrixXd& h = activations[l];
      delta = (weights_[l].transpose() * delta).array() * (1.0 - h.array().square());
    }
  }
  return loss;
}

Eigen::Index Mlp::parameter_count() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd theta(parameter_count());
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    theta.segment(offset, weights_[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(weights_[l].data(), weights_[l].size());
    offset += weights_[l].size();
    theta.segment(offset, biases_[l].size()) = biases_[l];
    offset += biases_[l].size();
  }
  return theta;
}

void Mlp::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != parameter_count()) {
    throw Error(ErrorCode::invalid_argument, "parameter vector has the wrong length");
  }
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::Map<Eigen::VectorXd>(weights_[l].data(), weights_[l].size()) =
        theta.segment(offset, weights_[l].size());
    offset += weights_[l].size();
    biases_[l] = theta.segment(offset, biases_[l].size());
    offset += biases_[l].size();
  }
}

void Mlp::set_layers(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases) {
  if (weights.empty() || weights.size() != biases.size()) {
    throw Error(ErrorCode::invalid_argument, "layer lists do not match");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != biases[l].size() ||
        (l > 0 && weights[l].cols() != weights[l - 1].rows())) {
      throw Error(ErrorCode::invalid_argument, "inconsistent layer shapes");
    }
  }
  inputs_ = static_cast<int>(weights.front().cols());
  outputs_ = static_cast<int>(weights.back().rows());
  hidden_.clear();
  for (std::size_t l = 0; l + 1 < weights.size(); ++l) hidden_.push_back(static_cast<int>(weights[l].rows()));
  weights_ = std::move(weights);
  biases_ = std::move(biases);
}

void adam_update(Eigen::VectorXd& theta, const Eigen::VectorXd& gradient, AdamState& state,
                 double learning_rate, double beta1, double beta2, double epsilon) {
  if (state.m.size() != theta.size()) {
    state.m = Eigen::VectorXd::Zero(theta.size());
    state.v = Eigen::VectorXd::Zero(theta.size());
    state.step = 0;
  }
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * gradient;
  state.v = beta2 * state.v + (1.0 - beta2) * gradient.cwiseProduct(gradient);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  theta.array() -= learning_rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + epsilon);
}

}  // namespace haptic::learner
