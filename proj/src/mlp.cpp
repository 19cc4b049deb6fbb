#include "admnorm/mlp.hpp"

#include "admnorm/rank_core.hpp"
#include "admnorm/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace admnorm {

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw std::invalid_argument("lr must be >= 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be >= 0");
}

std::size_t MlpState::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    count += static_cast<std::size_t>(weights[k].size() + biases[k].size());
  }
  return count;
}

MlpState make_zero_mlp(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2) throw ShapeError("an MLP needs at least input and output sizes");
  for (int s : layer_sizes) {
    if (s < 1) throw ShapeError("layer sizes must be positive");
  }
  MlpState st;
  st.layer_sizes = layer_sizes;
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const int in = layer_sizes[k];
    const int out = layer_sizes[k + 1];
    st.weights.push_back(Eigen::MatrixXd::Zero(out, in));
    st.biases.push_back(Eigen::VectorXd::Zero(out));
    st.m_weights.push_back(Eigen::MatrixXd::Zero(out, in));
    st.v_weights.push_back(Eigen::MatrixXd::Zero(out, in));
    st.m_biases.push_back(Eigen::VectorXd::Zero(out));
    st.v_biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return st;
}

MlpState make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  MlpState st = make_zero_mlp(layer_sizes);
  auto rng = Rng::stream(seed, "mlp/init");
  for (auto& w : st.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    // column-major fill order is part of the seeded layout
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
  return st;
}

ForwardCache mlp_forward_cached(const MlpState& state, const Eigen::MatrixXd& x) {
  if (x.cols() != state.input_dim()) {
    throw ShapeError("mlp_forward: input has " + std::to_string(x.cols()) +
                     " features, network expects " + std::to_string(state.input_dim()));
  }
  ForwardCache cache;
  cache.activations.push_back(x);
  for (std::size_t k = 0; k < state.layers(); ++k) {
    Eigen::MatrixXd z = cache.activations.back() * state.weights[k].transpose();
    z.rowwise() += state.biases[k].transpose();
    cache.pre_activations.push_back(z);
    if (k + 1 < state.layers()) cache.activations.push_back(z.cwiseMax(0.0));
  }
  return cache;
}

Eigen::VectorXd mlp_forward(const MlpState& state, const Eigen::MatrixXd& x) {
  return mlp_forward_cached(state, x).predictions();
}

double mlp_loss(const MlpState& state, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                double weight_decay) {
  const Eigen::VectorXd pred = mlp_forward(state, x);
  if (pred.size() != y.size()) throw ShapeError("mlp_loss: target length mismatch");
  double loss = (pred - y).squaredNorm() / static_cast<double>(y.size());
  if (weight_decay > 0.0) {
    double sq = 0.0;
    for (std::size_t k = 0; k < state.layers(); ++k) {
      sq += state.weights[k].squaredNorm() + state.biases[k].squaredNorm();
    }
    loss += 0.5 * weight_decay * sq;
  }
  return loss;
}

Gradients mlp_backward(const MlpState& state, const ForwardCache& cache, const Eigen::VectorXd& y,
                       double weight_decay) {
  if (cache.pre_activations.size() != state.layers()) {
    throw ShapeError("mlp_backward: cache does not match network depth");
  }
  const Eigen::Index n = cache.activations.front().rows();
  if (y.size() != n) throw ShapeError("mlp_backward: target length mismatch");
  if (state.layer_sizes.back() != 1) throw ShapeError("mlp_backward: expects a scalar output");

  Gradients g;
  g.weights.resize(state.layers());
  g.biases.resize(state.layers());

  // dL/dz for the output layer of mean squared error
  Eigen::MatrixXd delta = (2.0 / static_cast<double>(n)) * (cache.predictions() - y);
  for (std::size_t k = state.layers(); k-- > 0;) {
    const Eigen::MatrixXd& input = cache.activations[k];
    g.weights[k] = delta.transpose() * input;
    g.biases[k] = delta.colwise().sum().transpose();
    if (weight_decay > 0.0) {
      g.weights[k] += weight_decay * state.weights[k];
      g.biases[k] += weight_decay * state.biases[k];
    }
    if (k > 0) {
      Eigen::MatrixXd upstream = delta * state.weights[k];
      const Eigen::MatrixXd& z = cache.pre_activations[k - 1];
      delta = upstream.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

namespace {

template <typename Param>
void adam_update(Param& theta, Param& m, Param& v, const Param& grad, const TrainConfig& cfg,
                 double bc1, double bc2) {
  const auto& a = cfg.adam;
  m = a.beta1 * m + (1.0 - a.beta1) * grad;
  v = a.beta2 * v + (1.0 - a.beta2) * grad.cwiseProduct(grad);
  theta.array() -=
      cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + a.eps);
}

}  // namespace

void adam_step(MlpState& state, const Gradients& grads, const TrainConfig& cfg) {
  if (grads.weights.size() != state.layers() || grads.biases.size() != state.layers()) {
    throw ShapeError("adam_step: gradient depth mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.adam.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.adam.beta2, t);
  for (std::size_t k = 0; k < state.layers(); ++k) {
    adam_update(state.weights[k], state.m_weights[k], state.v_weights[k], grads.weights[k], cfg,
                bc1, bc2);
    adam_update(state.biases[k], state.m_biases[k], state.v_biases[k], grads.biases[k], cfg, bc1,
                bc2);
  }
}

}  // namespace admnorm
