#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace admnorm {

/// A named measurement. An empty value means "undefined" (never NaN or 0).
struct MetricValue {
  std::string name;
  std::optional<double> value;
  std::map<std::string, std::string> context;
};

using ScalarMap = std::function<double(double)>;

/// Pearson correlation of midrank vectors. Undefined when either input is constant.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

/// NDCG@k of items ordered by descending prediction (ties by original index).
/// Undefined when all relevance is zero.
std::optional<double> ndcg(std::span<const double> pred_scores, std::span<const double> relevance,
                           std::size_t k);

/// Linear rescaling to [0, 1]; a constant vector maps to all zeros.
std::vector<double> minmax_relevance(std::span<const double> y);

/// |f(x + eps) - f(x)| / |eps|.
double lipschitz_ratio(const ScalarMap& f, double x, double eps = 1e-3);

/// (f(x + h) - f(x - h)) / 2h.
double central_gradient(const ScalarMap& f, double x, double h = 1e-3);

/// Mean squared difference between shifted and clean outputs.
double operator_shift(std::span<const double> shifted, std::span<const double> base);

/// Population variance.
double output_variance(std::span<const double> values);

}  // namespace admnorm
