#pragma once

#include "admnorm/mlp.hpp"
#include "admnorm/operators.hpp"
#include "admnorm/rank_core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace admnorm {

/// Latent ranking task: z = X w, y = 0.5 logistic(z) + 0.2 sin(z) + 0.2 z + 0.1 eps,
/// with X_ij ~ N(0, 1), w ~ N(0, I) and eps ~ N(0, 0.1^2).
struct TaskData {
  FeatureMatrix x;
  std::vector<double> y;
  std::vector<double> w_latent;
};

/// Noise-free part of the target.
double latent_target(double z);

TaskData gen_synthetic_task(std::size_t n, std::size_t d, std::uint64_t seed);

/// Further rows of an existing task (same latent w), drawn from the streams "<label>/x"
/// and "<label>/noise".
TaskData gen_task_rows(std::span<const double> w_latent, std::size_t n, std::uint64_t seed,
                       std::string_view label);

struct TrainResult {
  MlpState state;
  /// Loss before each update, one entry per epoch.
  std::vector<double> epoch_losses;
  double final_loss = 0.0;
};

/// Full-batch Adam on MSE. Throws NumericError naming the epoch on a non-finite loss.
TrainResult train(MlpState state, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                  const TrainConfig& cfg);

/// Seeded permutation split; the last round(n * test_ratio) rows are the test set.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

SplitIndices split_indices(std::size_t n, double test_ratio, std::uint64_t seed);

struct RankMetrics {
  std::optional<double> ndcg;
  std::optional<double> spearman;
};

/// NDCG@n with min-max relevance of the true targets, plus Spearman.
RankMetrics rank_metrics(std::span<const double> y_true, std::span<const double> y_pred);

struct RobustnessConfig {
  /// Training rows (one full batch).
  std::size_t n = 1000;
  /// Held-out rows drawn fresh from the same latent task.
  std::size_t n_test = 1000;
  std::size_t d = 6;
  std::size_t hidden = 16;
  /// Refit operator context on the shifted data (false keeps the clean fit frozen).
  bool refit_on_shift = true;
  TrainConfig train;
};

struct ShiftEvaluation {
  std::string transform;
  RankMetrics metrics;
  /// Mean squared difference of operator outputs, shifted vs clean (test rows).
  double operator_shift = 0.0;
  std::vector<double> predictions;
};

struct RobustnessResult {
  OperatorConfig op;
  RankMetrics clean;
  std::vector<double> clean_predictions;
  std::vector<ShiftEvaluation> shifts;
  std::vector<double> epoch_losses;
  /// Smallest and largest operator output fed to the network, over all evaluations.
  double input_min = 0.0;
  double input_max = 0.0;
};

/// Evaluates a model trained on clean inputs under each monotone shift.
///
/// The shift is applied to training and test rows alike; with refit_on_shift,
/// QNorm stats are refitted on the shifted training rows and batch operators
/// see the shifted test batch.
RobustnessResult evaluate_robustness(const MlpState& model, const OperatorConfig& op,
                                     const FeatureMatrix& x_train, const TaskData& test,
                                     const std::vector<MonotoneTransform>& transforms,
                                     bool refit_on_shift);

/// Generates the task, trains d -> hidden -> 1 on operator outputs, evaluates shifts.
RobustnessResult run_model_robustness(const OperatorConfig& op, const RobustnessConfig& cfg,
                                      const std::vector<MonotoneTransform>& transforms);

struct TabularConfig {
  double test_ratio = 0.25;
  std::vector<int> hidden = {128, 128, 64, 32};
  OperatorConfig op;
  TrainConfig train{0.003, 400, 1e-4, {}, 0};
};

struct TabularResult {
  SplitIndices split;
  double train_mse = 0.0;
  double test_mse = 0.0;
  std::optional<double> train_spearman;
  std::optional<double> test_spearman;
  std::vector<double> epoch_losses;
};

/// z-score features and target with train-split statistics, QNorm fitted on
/// the train split, then the deep MLP.
TabularResult run_tabular_protocol(const FeatureMatrix& x, std::span<const double> y,
                                   const TabularConfig& cfg);

}  // namespace admnorm
