#include "admnorm/learner.hpp"

#include "admnorm/metrics.hpp"
#include "admnorm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace admnorm {

double latent_target(double z) { return 0.5 * logistic(z) + 0.2 * std::sin(z) + 0.2 * z; }

TaskData gen_task_rows(std::span<const double> w_latent, std::size_t n, std::uint64_t seed,
                       std::string_view label) {
  if (n < 1 || w_latent.empty()) throw ShapeError("gen_task_rows: n and d must be >= 1");
  auto x_rng = Rng::stream(seed, std::string(label) + "/x");
  auto noise_rng = Rng::stream(seed, std::string(label) + "/noise");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(w_latent.size());
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = x_rng.normal();
  }
  const Eigen::VectorXd z = x * Eigen::Map<const Eigen::VectorXd>(w_latent.data(), cols);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    // eps ~ N(0, 0.1^2) enters with coefficient 0.1
    const double eps = 0.1 * noise_rng.normal();
    y[i] = latent_target(z(static_cast<Eigen::Index>(i))) + 0.1 * eps;
  }
  return {FeatureMatrix(std::move(x)), std::move(y),
          std::vector<double>(w_latent.begin(), w_latent.end())};
}

TaskData gen_synthetic_task(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ShapeError("gen_synthetic_task: n and d must be >= 1");
  auto w_rng = Rng::stream(seed, "task/w");
  const std::vector<double> w = w_rng.normals(d);
  return gen_task_rows(w, n, seed, "task");
}

TrainResult train(MlpState state, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                  const TrainConfig& cfg) {
  cfg.validate();
  TrainResult res;
  res.epoch_losses.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const ForwardCache cache = mlp_forward_cached(state, inputs);
    double loss = (cache.predictions() - y).squaredNorm() / static_cast<double>(y.size());
    if (cfg.weight_decay > 0.0) {
      double sq = 0.0;
      for (std::size_t k = 0; k < state.layers(); ++k) {
        sq += state.weights[k].squaredNorm() + state.biases[k].squaredNorm();
      }
      loss += 0.5 * cfg.weight_decay * sq;
    }
    if (!std::isfinite(loss)) {
      throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
    }
    res.epoch_losses.push_back(loss);
    adam_step(state, mlp_backward(state, cache, y, cfg.weight_decay), cfg);
  }
  res.final_loss = mlp_loss(state, inputs, y, cfg.weight_decay);
  if (!std::isfinite(res.final_loss)) {
    throw NumericError("train: non-finite loss at epoch " + std::to_string(cfg.epochs));
  }
  res.state = std::move(state);
  return res;
}

SplitIndices split_indices(std::size_t n, double test_ratio, std::uint64_t seed) {
  if (!(test_ratio > 0.0 && test_ratio < 1.0)) {
    throw std::invalid_argument("test_ratio must lie in (0, 1)");
  }
  auto rng = Rng::stream(seed, "split");
  const auto perm = rng.permutation(n);
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_ratio));
  if (n_test == 0 || n_test >= n) throw ShapeError("split leaves an empty train or test set");
  SplitIndices s;
  s.train.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_test));
  s.test.assign(perm.end() - static_cast<std::ptrdiff_t>(n_test), perm.end());
  return s;
}

RankMetrics rank_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
  const auto rel = minmax_relevance(y_true);
  return {ndcg(y_pred, rel, y_true.size()), spearman(y_true, y_pred)};
}

namespace {

std::vector<double> gather(std::span<const double> values, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(values[i]);
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

RobustnessResult evaluate_robustness(const MlpState& model, const OperatorConfig& op,
                                     const FeatureMatrix& x_train, const TaskData& test,
                                     const std::vector<MonotoneTransform>& transforms,
                                     bool refit_on_shift) {
  FeatureOperator clean_op(op);
  clean_op.fit(x_train);
  const Eigen::MatrixXd clean_inputs = clean_op.apply(test.x).data;

  RobustnessResult res;
  res.op = op;
  res.clean_predictions = to_vector(mlp_forward(model, clean_inputs));
  res.clean = rank_metrics(test.y, res.clean_predictions);
  res.input_min = clean_inputs.minCoeff();
  res.input_max = clean_inputs.maxCoeff();

  const auto flat = [](const Eigen::MatrixXd& m) {
    return std::span<const double>(m.data(), static_cast<std::size_t>(m.size()));
  };
  for (const auto& t : transforms) {
    const FeatureMatrix shifted_test = apply_transform(test.x, t);
    Eigen::MatrixXd inputs;
    if (refit_on_shift) {
      FeatureOperator refit(op);
      refit.fit(apply_transform(x_train, t));
      inputs = refit.apply(shifted_test).data;
    } else {
      inputs = clean_op.apply(shifted_test).data;
    }
    ShiftEvaluation ev;
    ev.transform = t.name();
    ev.predictions = to_vector(mlp_forward(model, inputs));
    ev.metrics = rank_metrics(test.y, ev.predictions);
    ev.operator_shift = operator_shift(flat(inputs), flat(clean_inputs));
    res.input_min = std::min(res.input_min, inputs.minCoeff());
    res.input_max = std::max(res.input_max, inputs.maxCoeff());
    res.shifts.push_back(std::move(ev));
  }
  return res;
}

RobustnessResult run_model_robustness(const OperatorConfig& op, const RobustnessConfig& cfg,
                                      const std::vector<MonotoneTransform>& transforms) {
  const TaskData task = gen_synthetic_task(cfg.n, cfg.d, cfg.train.seed);
  const TaskData test = gen_task_rows(task.w_latent, cfg.n_test, cfg.train.seed, "task/test");

  FeatureOperator front(op);
  front.fit(task.x);
  const Eigen::MatrixXd inputs = front.apply(task.x).data;

  MlpState model =
      make_mlp({static_cast<int>(cfg.d), static_cast<int>(cfg.hidden), 1}, cfg.train.seed);
  const Eigen::Map<const Eigen::VectorXd> y(task.y.data(), static_cast<Eigen::Index>(task.y.size()));
  TrainResult trained = train(std::move(model), inputs, y, cfg.train);
  RobustnessResult res =
      evaluate_robustness(trained.state, op, task.x, test, transforms, cfg.refit_on_shift);
  res.epoch_losses = std::move(trained.epoch_losses);
  res.input_min = std::min(res.input_min, inputs.minCoeff());
  res.input_max = std::max(res.input_max, inputs.maxCoeff());
  return res;
}

TabularResult run_tabular_protocol(const FeatureMatrix& x, std::span<const double> y,
                                   const TabularConfig& cfg) {
  if (static_cast<Eigen::Index>(y.size()) != x.rows()) {
    throw ShapeError("run_tabular_protocol: target length does not match row count");
  }
  TabularResult res;
  res.split = split_indices(y.size(), cfg.test_ratio, cfg.train.seed);

  const FeatureMatrix raw_train = x.select_rows(res.split.train);
  const FeatureMatrix raw_test = x.select_rows(res.split.test);

  // feature z-scoring with train statistics
  const NormalizationStats scaler = fit_stats(raw_train);
  auto zscore = [&](const FeatureMatrix& m) {
    Eigen::MatrixXd z = m.data();
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      z.col(j) = (z.col(j).array() - scaler.mu(j)) / scaler.sigma(j);
    }
    return FeatureMatrix(std::move(z));
  };
  const FeatureMatrix z_train = zscore(raw_train);
  const FeatureMatrix z_test = zscore(raw_test);

  // target z-scoring with train statistics
  std::vector<double> y_train = gather(y, res.split.train);
  std::vector<double> y_test = gather(y, res.split.test);
  double y_mean = 0.0;
  for (double v : y_train) y_mean += v;
  y_mean /= static_cast<double>(y_train.size());
  double y_var = 0.0;
  for (double v : y_train) y_var += (v - y_mean) * (v - y_mean);
  const double y_std = std::sqrt(y_var / static_cast<double>(y_train.size()));
  if (!(y_std > 1e-12)) {
    throw std::invalid_argument("run_tabular_protocol: target is constant on the train split");
  }
  for (double& v : y_train) v = (v - y_mean) / y_std;
  for (double& v : y_test) v = (v - y_mean) / y_std;

  FeatureOperator front(cfg.op);
  front.fit(z_train);
  const Eigen::MatrixXd in_train = front.apply(z_train).data;
  const Eigen::MatrixXd in_test = front.apply(z_test).data;

  std::vector<int> sizes{static_cast<int>(x.cols())};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);

  const Eigen::Map<const Eigen::VectorXd> yt(y_train.data(),
                                             static_cast<Eigen::Index>(y_train.size()));
  const Eigen::Map<const Eigen::VectorXd> ye(y_test.data(),
                                             static_cast<Eigen::Index>(y_test.size()));
  TrainResult trained = train(make_mlp(sizes, cfg.train.seed), in_train, yt, cfg.train);
  res.epoch_losses = std::move(trained.epoch_losses);

  const Eigen::VectorXd p_train = mlp_forward(trained.state, in_train);
  const Eigen::VectorXd p_test = mlp_forward(trained.state, in_test);
  res.train_mse = (p_train - yt).squaredNorm() / static_cast<double>(yt.size());
  res.test_mse = (p_test - ye).squaredNorm() / static_cast<double>(ye.size());
  res.train_spearman = spearman(y_train, to_vector(p_train));
  res.test_spearman = spearman(y_test, to_vector(p_test));
  return res;
}

}  // namespace admnorm
