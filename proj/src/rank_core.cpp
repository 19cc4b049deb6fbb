#include "admnorm/rank_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace admnorm {

double logistic(double z) {
  // Branch on sign so e^{-z} never overflows.
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw ShapeError("FeatureMatrix requires n >= 1 and d >= 1");
  }
  if (!data_.allFinite()) {
    throw NumericError("FeatureMatrix entries must be finite");
  }
}

FeatureMatrix FeatureMatrix::column(std::span<const double> values) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = values[i];
  }
  return FeatureMatrix(std::move(m));
}

std::vector<double> FeatureMatrix::column_values(Eigen::Index j) const {
  std::vector<double> out(static_cast<std::size_t>(rows()));
  Eigen::Map<Eigen::VectorXd>(out.data(), rows()) = data_.col(j);
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(indices.size()), cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    m.row(static_cast<Eigen::Index>(r)) = data_.row(static_cast<Eigen::Index>(indices[r]));
  }
  return FeatureMatrix(std::move(m));
}

double MonotoneTransform::operator()(double x) const {
  switch (kind) {
    case TransformKind::identity:
      return x;
    case TransformKind::log_signed:
      return std::copysign(std::log1p(std::abs(x)), x);
    case TransformKind::sqrt_signed: {
      // sign(0) = 0 keeps the map strictly increasing through the origin.
      const double mag = std::sqrt(std::abs(x) + param);
      return x > 0.0 ? mag : (x < 0.0 ? -mag : 0.0);
    }
    case TransformKind::exp01: {
      const double arg = param * x;
      if (!(std::abs(arg) <= kExpGuard)) {
        throw NumericError("transform 'exp': exponent " + std::to_string(arg) +
                           " exceeds guard of 700");
      }
      return std::exp(arg);
    }
    case TransformKind::scale:
      return param * x;
    case TransformKind::shift:
      return x + param;
    case TransformKind::warp:
      return std::tanh(param * x);
  }
  return x;
}

std::string MonotoneTransform::name() const {
  switch (kind) {
    case TransformKind::identity:
      return "identity";
    case TransformKind::log_signed:
      return "log";
    case TransformKind::sqrt_signed:
      return "sqrt";
    case TransformKind::exp01:
      return "exp";
    case TransformKind::scale:
      return "scale";
    case TransformKind::shift:
      return "shift";
    case TransformKind::warp:
      return "warp";
  }
  return "unknown";
}

MonotoneTransform transform_from_name(std::string_view name) {
  if (name == "identity") return MonotoneTransform::identity();
  if (name == "log") return MonotoneTransform::log_signed();
  if (name == "sqrt") return MonotoneTransform::sqrt_signed();
  if (name == "exp") return MonotoneTransform::exp01();
  if (name == "scale") return MonotoneTransform::scale();
  if (name == "shift") return MonotoneTransform::shift();
  if (name == "warp") return MonotoneTransform::warp();
  throw std::invalid_argument("unknown transform '" + std::string(name) + "'");
}

std::vector<MonotoneTransform> stability_transforms() {
  return {MonotoneTransform::log_signed(), MonotoneTransform::sqrt_signed(),
          MonotoneTransform::exp01(), MonotoneTransform::scale()};
}

std::vector<MonotoneTransform> model_shift_transforms() {
  return {MonotoneTransform::scale(), MonotoneTransform::shift(), MonotoneTransform::warp(),
          MonotoneTransform::exp01()};
}

NormalizationStats fit_stats(const FeatureMatrix& x) {
  const auto n = static_cast<double>(x.rows());
  NormalizationStats stats;
  stats.mu = x.data().colwise().sum().transpose() / n;
  stats.sigma.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.data().col(j).array() - stats.mu(j)).square().sum();
    stats.sigma(j) = std::sqrt(ss / n) + kSigmaFloor;
  }
  return stats;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    // positions i..j (0-based) share rank mean((i+1)..(j+1))
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = avg;
    }
    i = j + 1;
  }
  return ranks;
}

RankRepresentation empirical_rank(const FeatureMatrix& x) {
  const Eigen::Index n = x.rows();
  RankRepresentation out{Eigen::MatrixXd(n, x.cols()), RankKind::exact};
  if (n == 1) {
    out.data.setConstant(0.5);
    return out;
  }
  const double denom = static_cast<double>(n - 1);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto col = x.column_values(j);
    const auto ranks = midranks(col);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.data(i, j) = (ranks[static_cast<std::size_t>(i)] - 1.0) / denom;
    }
  }
  return out;
}

RankRepresentation relaxed_rank(const FeatureMatrix& x, const NormalizationStats& stats) {
  if (stats.dims() != x.cols() || stats.sigma.size() != x.cols()) {
    throw ShapeError("relaxed_rank: stats fitted for d=" + std::to_string(stats.dims()) +
                     " but input has d=" + std::to_string(x.cols()));
  }
  RankRepresentation out{Eigen::MatrixXd(x.rows(), x.cols()), RankKind::relaxed};
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out.data(i, j) = logistic((x(i, j) - stats.mu(j)) / stats.sigma(j));
    }
  }
  return out;
}

FeatureMatrix apply_transform(const FeatureMatrix& x, const MonotoneTransform& t) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double v = t(x(i, j));
      if (!std::isfinite(v)) {
        throw NumericError("transform '" + t.name() + "' produced a non-finite value");
      }
      out(i, j) = v;
    }
  }
  return FeatureMatrix(std::move(out));
}

}  // namespace admnorm
