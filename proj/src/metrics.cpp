#include "admnorm/metrics.hpp"

#include "admnorm/rank_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace admnorm {

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("spearman: length mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.size() < 2) throw ShapeError("spearman: need at least two observations");
  const auto ra = midranks(a);
  const auto rb = midranks(b);
  const double n = static_cast<double>(a.size());
  // both rank vectors have mean (n + 1) / 2
  const double mean = 0.5 * (n + 1.0);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::optional<double> ndcg(std::span<const double> pred_scores, std::span<const double> relevance,
                           std::size_t k) {
  if (pred_scores.size() != relevance.size()) throw ShapeError("ndcg: length mismatch");
  const std::size_t n = relevance.size();
  if (k == 0 || k > n) throw ShapeError("ndcg: k must satisfy 1 <= k <= n");
  for (double r : relevance) {
    if (!(r >= 0.0)) throw std::invalid_argument("ndcg: relevance must be nonnegative");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return pred_scores[x] > pred_scores[y];
  });
  std::vector<double> ideal(relevance.begin(), relevance.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());

  double dcg = 0.0;
  double idcg = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += relevance[order[i]] / discount;
    idcg += ideal[i] / discount;
  }
  if (idcg == 0.0) return std::nullopt;
  return std::min(dcg / idcg, 1.0);
}

std::vector<double> minmax_relevance(std::span<const double> y) {
  std::vector<double> rel(y.size(), 0.0);
  if (y.empty()) return rel;
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  if (range == 0.0) return rel;
  for (std::size_t i = 0; i < y.size(); ++i) rel[i] = (y[i] - *lo) / range;
  return rel;
}

namespace {

double checked(double v, const char* what, double x) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + ": non-finite map output near x=" + std::to_string(x));
  }
  return v;
}

}  // namespace

double lipschitz_ratio(const ScalarMap& f, double x, double eps) {
  if (eps == 0.0) throw std::invalid_argument("lipschitz_ratio: eps must be nonzero");
  const double base = checked(f(x), "lipschitz_ratio", x);
  const double moved = checked(f(x + eps), "lipschitz_ratio", x);
  return std::abs(moved - base) / std::abs(eps);
}

double central_gradient(const ScalarMap& f, double x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("central_gradient: h must be > 0");
  const double hi = checked(f(x + h), "central_gradient", x);
  const double lo = checked(f(x - h), "central_gradient", x);
  return (hi - lo) / (2.0 * h);
}

double operator_shift(std::span<const double> shifted, std::span<const double> base) {
  if (shifted.size() != base.size()) throw ShapeError("operator_shift: length mismatch");
  if (base.empty()) throw ShapeError("operator_shift: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double d = shifted[i] - base[i];
    acc += d * d;
  }
  return acc / static_cast<double>(base.size());
}

double output_variance(std::span<const double> values) {
  if (values.empty()) throw ShapeError("output_variance: empty input");
  // Centre on the first value so identical inputs give exactly zero.
  const double n = static_cast<double>(values.size());
  const double origin = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - origin;
  const double mean = sum / n;
  double acc = 0.0;
  for (double v : values) {
    const double d = (v - origin) - mean;
    acc += d * d;
  }
  return acc / n;
}

}  // namespace admnorm
