#include "admnorm/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace admnorm {

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::qnorm:
      return "qnorm";
    case OperatorKind::softsort:
      return "softsort";
    case OperatorKind::sinkhorn:
      return "sinkhorn";
    case OperatorKind::batch_ecdf:
      return "batch-ecdf";
    case OperatorKind::value_gap_pair:
      return "value-gap-pair";
  }
  return "unknown";
}

OperatorKind operator_from_name(std::string_view name) {
  if (name == "qnorm") return OperatorKind::qnorm;
  if (name == "softsort") return OperatorKind::softsort;
  if (name == "sinkhorn") return OperatorKind::sinkhorn;
  if (name == "batch-ecdf") return OperatorKind::batch_ecdf;
  if (name == "value-gap-pair") return OperatorKind::value_gap_pair;
  throw std::invalid_argument("unknown operator '" + std::string(name) + "'");
}

void OperatorConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!(sinkhorn_epsilon > 0.0)) throw std::invalid_argument("sinkhorn_epsilon must be > 0");
  if (sinkhorn_iters < 1) throw std::invalid_argument("sinkhorn_iters must be >= 1");
  if (!(epsilon_out >= 0.0 && epsilon_out < 0.5)) {
    throw std::invalid_argument("epsilon_out must lie in [0, 0.5)");
  }
  if (weights) {
    for (double w : *weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("scalarization weights must be >= 0");
    }
  }
}

Eigen::VectorXd unit_linspace(Eigen::Index n) {
  if (n == 1) return Eigen::VectorXd::Zero(1);
  Eigen::VectorXd v(n);
  const double denom = static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = static_cast<double>(i) / denom;
  return v;
}

namespace {

double clamp_affine(double p, double eps) { return p * (1.0 - 2.0 * eps) + eps; }

}  // namespace

OperatorOutput qnorm_apply(const FeatureMatrix& x, const NormalizationStats& stats,
                           const OperatorConfig& cfg) {
  const RankRepresentation r = relaxed_rank(x, stats);
  OperatorOutput out{r.data};
  for (Eigen::Index j = 0; j < out.data.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.data.rows(); ++i) {
      out.data(i, j) = clamp_affine(out.data(i, j), cfg.epsilon_out);
    }
  }
  return out;
}

std::vector<double> uniform_weights(Eigen::Index d) {
  return std::vector<double>(static_cast<std::size_t>(d), 1.0 / static_cast<double>(d));
}

OperatorOutput qnorm_scalarize(const RankRepresentation& ranks, std::span<const double> weights,
                               const OperatorConfig& cfg) {
  if (static_cast<Eigen::Index>(weights.size()) != ranks.data.cols()) {
    throw ShapeError("qnorm_scalarize: weight length " + std::to_string(weights.size()) +
                     " != d=" + std::to_string(ranks.data.cols()));
  }
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("qnorm_scalarize: negative weight rejected");
  }
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(),
                                            static_cast<Eigen::Index>(weights.size()));
  const Eigen::VectorXd score = ranks.data * w;
  OperatorOutput out{Eigen::MatrixXd(ranks.data.rows(), 1)};
  for (Eigen::Index i = 0; i < score.size(); ++i) {
    out.data(i, 0) = clamp_affine(logistic(score(i)), cfg.epsilon_out);
  }
  return out;
}

namespace {

Eigen::MatrixXd softsort_weights(std::span<const double> column, double tau) {
  const auto n = static_cast<Eigen::Index>(column.size());
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // logits are -(gap^2)/tau; the max logit is 0 at j == i
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double gap = column[static_cast<std::size_t>(i)] - column[static_cast<std::size_t>(j)];
      const double e = std::exp(-(gap * gap) / tau);
      w(i, j) = e;
      row_sum += e;
    }
    w.row(i) /= row_sum;
  }
  return w;
}

}  // namespace

SortResult softsort_apply(std::span<const double> column, const OperatorConfig& cfg) {
  if (column.empty()) throw ShapeError("softsort_apply: empty column");
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("softsort_apply: tau must be > 0");
  const auto n = static_cast<Eigen::Index>(column.size());
  Eigen::MatrixXd w = softsort_weights(column, cfg.tau);
  const Eigen::VectorXd out = w * unit_linspace(n);
  return {std::vector<double>(out.data(), out.data() + n),
          {std::move(w), PermutationKind::row_stochastic}};
}

std::vector<double> softsort_outputs(std::span<const double> column, const OperatorConfig& cfg) {
  if (column.empty()) throw ShapeError("softsort_apply: empty column");
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("softsort_apply: tau must be > 0");
  const std::size_t n = column.size();
  const double denom = n == 1 ? 1.0 : static_cast<double>(n - 1);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double gap = column[i] - column[j];
      const double e = std::exp(-(gap * gap) / cfg.tau);
      row_sum += e;
      acc += e * (n == 1 ? 0.0 : static_cast<double>(j) / denom);
    }
    out[i] = acc / row_sum;
  }
  return out;
}

SortResult sinkhorn_apply(std::span<const double> column, const OperatorConfig& cfg) {
  if (column.empty()) throw ShapeError("sinkhorn_apply: empty column");
  if (!(cfg.sinkhorn_epsilon > 0.0) || cfg.sinkhorn_iters < 1) {
    throw std::invalid_argument("sinkhorn_apply: epsilon must be > 0 and iters >= 1");
  }
  const auto n = static_cast<Eigen::Index>(column.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double cost =
          std::abs(column[static_cast<std::size_t>(i)] - column[static_cast<std::size_t>(j)]);
      k(i, j) = std::max(std::exp(-cost / cfg.sinkhorn_epsilon), kSinkhornKernelFloor);
    }
  }

  Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < cfg.sinkhorn_iters; ++it) {
    u = (k * v).cwiseInverse();
    v = (k.transpose() * u).cwiseInverse();
    if (!u.allFinite() || !v.allFinite()) {
      throw NumericError("sinkhorn_apply: non-finite scaling at iteration " + std::to_string(it));
    }
  }

  Eigen::MatrixXd p = u.asDiagonal() * k * v.asDiagonal();
  const Eigen::VectorXd out = p * unit_linspace(n);
  return {std::vector<double>(out.data(), out.data() + n),
          {std::move(p), PermutationKind::doubly_stochastic_approx}};
}

double batch_ecdf_apply(double x, std::span<const double> batch) {
  if (batch.empty()) throw ShapeError("batch_ecdf_apply: empty batch");
  std::size_t count = 0;
  for (double y : batch) {
    if (y <= x) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(batch.size());
}

std::pair<double, double> value_gap_pair(double u, double v, const MonotoneTransform& g) {
  return {std::abs(u - v), std::abs(g(u) - g(v))};
}

FeatureOperator::FeatureOperator(OperatorConfig cfg, StatsMode mode)
    : cfg_(std::move(cfg)), mode_(mode) {
  cfg_.validate();
  if (cfg_.kind != OperatorKind::qnorm && cfg_.kind != OperatorKind::softsort &&
      cfg_.kind != OperatorKind::sinkhorn) {
    throw std::invalid_argument("FeatureOperator supports qnorm, softsort and sinkhorn only");
  }
}

void FeatureOperator::fit(const FeatureMatrix& reference) {
  if (cfg_.kind == OperatorKind::qnorm) stats_ = fit_stats(reference);
}

OperatorOutput FeatureOperator::apply(const FeatureMatrix& batch) const {
  switch (cfg_.kind) {
    case OperatorKind::qnorm: {
      if (mode_ == StatsMode::refit_per_batch_inadmissible) {
        return qnorm_apply(batch, fit_stats(batch), cfg_);
      }
      if (!stats_) throw std::logic_error("qnorm front-end used before fit()");
      if (cfg_.weights) {
        return qnorm_scalarize(relaxed_rank(batch, *stats_), *cfg_.weights, cfg_);
      }
      return qnorm_apply(batch, *stats_, cfg_);
    }
    case OperatorKind::softsort:
    case OperatorKind::sinkhorn: {
      OperatorOutput out{Eigen::MatrixXd(batch.rows(), batch.cols())};
      for (Eigen::Index j = 0; j < batch.cols(); ++j) {
        const auto col = batch.column_values(j);
        const auto values = cfg_.kind == OperatorKind::softsort
                                ? softsort_outputs(col, cfg_)
                                : sinkhorn_apply(col, cfg_).outputs;
        for (Eigen::Index i = 0; i < batch.rows(); ++i) {
          out.data(i, j) = values[static_cast<std::size_t>(i)];
        }
      }
      return out;
    }
    default:
      break;
  }
  throw std::logic_error("unsupported operator kind");
}

}  // namespace admnorm
