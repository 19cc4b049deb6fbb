#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace admnorm {

/// Raised when matrix/vector shapes disagree or a size precondition fails.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation would produce (or was fed) a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimum standard deviation added to every fitted sigma.
inline constexpr double kSigmaFloor = 1e-6;

/// Standard logistic function 1 / (1 + e^{-z}).
double logistic(double z);

/// n x d matrix of finite samples. Rows are samples, columns are features.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Eigen::MatrixXd data);

  /// Single-feature column.
  static FeatureMatrix column(std::span<const double> values);

  Eigen::Index rows() const { return data_.rows(); }
  Eigen::Index cols() const { return data_.cols(); }
  const Eigen::MatrixXd& data() const { return data_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }

  /// Copy of column j as a plain vector.
  std::vector<double> column_values(Eigen::Index j) const;

  /// Subset of rows in the given order.
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

 private:
  Eigen::MatrixXd data_;
};

enum class RankKind { exact, relaxed };

/// Feature-wise rank values in [0, 1].
struct RankRepresentation {
  Eigen::MatrixXd data;
  RankKind kind;
};

/// Per-feature (mean, std + floor) frozen at fit time.
struct NormalizationStats {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;

  Eigen::Index dims() const { return mu.size(); }
  double sigma_min() const { return sigma.minCoeff(); }
};

enum class TransformKind { identity, log_signed, sqrt_signed, exp01, scale, shift, warp };

/// Strictly increasing scalar map applied element-wise.
struct MonotoneTransform {
  TransformKind kind = TransformKind::identity;
  double param = 0.0;

  static MonotoneTransform identity() { return {TransformKind::identity, 0.0}; }
  /// sign(x) log(1 + |x|)
  static MonotoneTransform log_signed() { return {TransformKind::log_signed, 0.0}; }
  /// sign(x) sqrt(|x| + param), param defaults to 1e-6
  static MonotoneTransform sqrt_signed(double offset = 1e-6) {
    return {TransformKind::sqrt_signed, offset};
  }
  /// e^{param * x}, param defaults to 0.1
  static MonotoneTransform exp01(double rate = 0.1) { return {TransformKind::exp01, rate}; }
  static MonotoneTransform scale(double factor = 2.5) { return {TransformKind::scale, factor}; }
  static MonotoneTransform shift(double offset = 3.0) { return {TransformKind::shift, offset}; }
  /// tanh(param * x)
  static MonotoneTransform warp(double gain = 2.5) { return {TransformKind::warp, gain}; }

  /// Throws NumericError when the exponent guard of exp01 is exceeded.
  double operator()(double x) const;

  std::string name() const;
};

/// Looks up a transform by name ("log", "sqrt", "exp", "scale", "shift", "warp", "identity").
MonotoneTransform transform_from_name(std::string_view name);

/// The four operator-level shifts: log, sqrt, exp, scale.
std::vector<MonotoneTransform> stability_transforms();

/// The four model-level shifts: scale, shift, warp, exp.
std::vector<MonotoneTransform> model_shift_transforms();

/// Largest admissible |rate * x| for exp01.
inline constexpr double kExpGuard = 700.0;

NormalizationStats fit_stats(const FeatureMatrix& x);

/// Average-tie ranks normalized by (rank - 1) / (n - 1); n == 1 yields 0.5.
RankRepresentation empirical_rank(const FeatureMatrix& x);

/// logistic((x - mu) / sigma) per entry.
RankRepresentation relaxed_rank(const FeatureMatrix& x, const NormalizationStats& stats);

FeatureMatrix apply_transform(const FeatureMatrix& x, const MonotoneTransform& t);

/// 1-based average ranks of a sequence (ties share the mean of their positions).
std::vector<double> midranks(std::span<const double> values);

}  // namespace admnorm
