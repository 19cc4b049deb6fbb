#pragma once

#include "admnorm/rank_core.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace admnorm {

enum class OperatorKind { qnorm, softsort, sinkhorn, batch_ecdf, value_gap_pair };

std::string to_string(OperatorKind kind);
OperatorKind operator_from_name(std::string_view name);

struct OperatorConfig {
  OperatorKind kind = OperatorKind::qnorm;
  /// QNorm output clamp: outputs live in [epsilon_out, 1 - epsilon_out].
  double epsilon_out = 1e-6;
  /// SoftSort temperature.
  double tau = 0.1;
  /// Entropic regularization of the Sinkhorn kernel.
  double sinkhorn_epsilon = 0.1;
  int sinkhorn_iters = 15;
  /// Scalarization weights (nonnegative, length d). Absent means feature-wise mode.
  std::optional<std::vector<double>> weights;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

enum class PermutationKind { row_stochastic, doubly_stochastic_approx };

struct SoftPermutation {
  Eigen::MatrixXd matrix;
  PermutationKind kind;
};

/// Operator values in [0, 1]; n x d (feature-wise) or n x 1 (scalarized).
struct OperatorOutput {
  Eigen::MatrixXd data;
};

struct SortResult {
  std::vector<double> outputs;
  SoftPermutation permutation;
};

/// Kernel entries below this are raised to it before any division.
inline constexpr double kSinkhornKernelFloor = 1e-30;

/// linspace(0, 1, n) with inclusive endpoints; n == 1 gives {0}.
Eigen::VectorXd unit_linspace(Eigen::Index n);

/// Pointwise logistic((x - mu) / sigma) * (1 - 2 eps) + eps with frozen stats.
OperatorOutput qnorm_apply(const FeatureMatrix& x, const NormalizationStats& stats,
                           const OperatorConfig& cfg);

/// logistic(w . r_i) * (1 - 2 eps) + eps per row; w must be nonnegative.
OperatorOutput qnorm_scalarize(const RankRepresentation& ranks, std::span<const double> weights,
                               const OperatorConfig& cfg);

/// Uniform 1/d weights.
std::vector<double> uniform_weights(Eigen::Index d);

/// SoftSort over one batch column: W_ij ∝ exp(-(x_i - x_j)^2 / tau), outputs = W linspace.
SortResult softsort_apply(std::span<const double> column, const OperatorConfig& cfg);

/// SoftSort outputs only (skips materializing W).
std::vector<double> softsort_outputs(std::span<const double> column, const OperatorConfig& cfg);

/// Sinkhorn-normalized exp(-|x_i - x_j| / eps) kernel, outputs = P linspace.
SortResult sinkhorn_apply(std::span<const double> column, const OperatorConfig& cfg);

/// Within-batch ECDF (1/|B|) #{y in B : y <= x}. Batch-dependent by construction.
///
/// The worked values used as a counterexample (Q(x|{x,2}) = 1/2 and
/// Q(2|{x,2}) = 1 for x < 2) are those of the ECDF counting y <= x; the
/// indicator I{x <= y} would give the reverse values, so this follows the
/// worked values.
double batch_ecdf_apply(double x, std::span<const double> batch);

/// Value-gap operator psi(|u - v|) with psi = identity, before and after g.
std::pair<double, double> value_gap_pair(double u, double v, const MonotoneTransform& g);

enum class StatsMode {
  /// Statistics fitted once on a reference population and reused for every batch.
  frozen,
  /// Statistics refitted on each batch. Violates batch independence; negative controls only.
  refit_per_batch_inadmissible,
};

/// Feature-wise front-end over any of the batch operators (qnorm, softsort, sinkhorn).
///
/// QNorm needs fit() on a reference population before apply(). SoftSort and
/// Sinkhorn act on each column over the batch dimension and ignore fit().
class FeatureOperator {
 public:
  explicit FeatureOperator(OperatorConfig cfg, StatsMode mode = StatsMode::frozen);

  void fit(const FeatureMatrix& reference);
  OperatorOutput apply(const FeatureMatrix& batch) const;

  const OperatorConfig& config() const { return cfg_; }
  const std::optional<NormalizationStats>& stats() const { return stats_; }
  StatsMode mode() const { return mode_; }

 private:
  OperatorConfig cfg_;
  StatsMode mode_;
  std::optional<NormalizationStats> stats_;
};

}  // namespace admnorm
