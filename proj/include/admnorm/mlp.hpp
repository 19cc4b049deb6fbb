#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace admnorm {

/// Adam constants (reference-ecosystem defaults).
struct AdamConstants {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  double lr = 0.003;
  int epochs = 50;
  /// Coupled L2: adds weight_decay * theta to every parameter gradient.
  double weight_decay = 0.0;
  AdamConstants adam;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Fully connected ReLU network. Layer k maps layer_sizes[k] -> layer_sizes[k+1];
/// the last layer is affine with no activation.
struct MlpState {
  std::vector<int> layer_sizes;
  /// weights[k] has shape (out, in).
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<Eigen::MatrixXd> m_weights;
  std::vector<Eigen::MatrixXd> v_weights;
  std::vector<Eigen::VectorXd> m_biases;
  std::vector<Eigen::VectorXd> v_biases;
  long step = 0;

  std::size_t layers() const { return weights.size(); }
  int input_dim() const { return layer_sizes.front(); }
  std::size_t parameter_count() const;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Activations kept for the backward pass. activations[0] is the input (n x d),
/// activations[k] the post-ReLU output of layer k-1; pre_activations[k] is layer k's affine output.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
  std::vector<Eigen::MatrixXd> pre_activations;

  Eigen::VectorXd predictions() const { return pre_activations.back().col(0); }
};

/// Zero-parameter network with the given shape (moments zeroed, step 0).
MlpState make_zero_mlp(const std::vector<int>& layer_sizes);

/// Xavier-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
MlpState make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

ForwardCache mlp_forward_cached(const MlpState& state, const Eigen::MatrixXd& x);
Eigen::VectorXd mlp_forward(const MlpState& state, const Eigen::MatrixXd& x);

/// mean((pred - y)^2) + weight_decay / 2 * sum(theta^2).
double mlp_loss(const MlpState& state, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                double weight_decay);

/// Exact gradient of mlp_loss at the cached forward pass.
Gradients mlp_backward(const MlpState& state, const ForwardCache& cache, const Eigen::VectorXd& y,
                       double weight_decay);

/// One bias-corrected Adam update in place; increments the step counter.
void adam_step(MlpState& state, const Gradients& grads, const TrainConfig& cfg);

}  // namespace admnorm
