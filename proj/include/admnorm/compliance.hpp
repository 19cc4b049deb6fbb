#pragma once

#include "admnorm/operators.hpp"
#include "admnorm/rank_core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace admnorm {

/// Evenly spaced points over [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, std::size_t count);

struct ComplianceConfig {
  std::size_t n_samples = 2000;
  std::size_t population_size = 8000;
  std::size_t n_batches = 200;
  std::size_t batch_size = 256;
  double eps_perturb = 1e-3;
  double grad_h = 1e-3;
  /// Fixed sample shared by every batch of the batch-independence audit.
  double probe_x0 = 2.5;
  std::vector<double> probe_grid = linspace(-1.0, 1.0, 64);
  std::size_t rank_lipschitz_pairs = 10000;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr double kRhoTolerance = 1e-9;
inline constexpr double kVarianceTolerance = 1e-12;

struct TransformRho {
  std::string transform;
  std::optional<double> rho;
};

struct C3Result {
  double lipschitz_min = 0.0;
  double lipschitz_max = 0.0;
  double grad_min = 0.0;
  double grad_max = 0.0;
  /// Set when a probe produced a non-finite value.
  std::optional<std::string> failure;
};

struct RankLipschitzResult {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  /// Largest observed |Q(x) - Q(x')| / |r(x) - r(x')| over pairs with distinct ranks.
  double max_ratio = 0.0;
  double bound = 0.0;

  bool holds() const { return violations == 0; }
};

struct Verdict {
  bool pass = false;
  std::string reason;
};

struct ComplianceReport {
  OperatorConfig op;
  ComplianceConfig cfg;
  std::vector<TransformRho> c1;
  double c2_variance = 0.0;
  C3Result c3;
  /// 0.25 / sigma_min * (1 - 2 eps_out) + 1e-6 on the reference fit.
  double c3_bound = 0.0;
  std::optional<RankLipschitzResult> rank_lipschitz;
  Verdict c1_verdict;
  Verdict c2_verdict;
  Verdict c3_verdict;
  std::map<std::string, std::string> metadata;

  bool admissible() const { return c1_verdict.pass && c2_verdict.pass && c3_verdict.pass; }
};

/// Draws the n_samples x 1 N(0, 1) dataset used by the invariance audit.
FeatureMatrix c1_dataset(const ComplianceConfig& cfg);

/// Spearman(f(x), f(t(x))) per transform, with operator context recomputed on t(x).
/// For d > 1 the minimum over features is reported.
std::vector<TransformRho> run_c1(const OperatorConfig& op, const FeatureMatrix& data,
                                 const std::vector<MonotoneTransform>& transforms);

/// Population variance of the operator output at probe_x0 across n_batches batches.
double run_c2(const OperatorConfig& op, const ComplianceConfig& cfg);

/// Lipschitz-ratio and |gradient| ranges over the probe grid.
C3Result run_c3(const OperatorConfig& op, const ComplianceConfig& cfg);

/// Analytic C3 bound for the reference fit used by run_c3.
double c3_declared_bound(const OperatorConfig& op, const ComplianceConfig& cfg);

/// Checks |Q(x) - Q(x')| <= (1 - 2 eps_out) |r(x) - r(x')| on seeded N(0, 1) pairs.
RankLipschitzResult verify_rank_lipschitz(const OperatorConfig& op, const ComplianceConfig& cfg);

Verdict c1_verdict(const std::vector<TransformRho>& rhos);
Verdict c2_verdict(double variance);
Verdict c3_verdict(const C3Result& c3, double bound);

/// Full audit of one operator.
ComplianceReport run_compliance(const OperatorConfig& op, const ComplianceConfig& cfg);

struct ControlsReport {
  // value-gap operator under monotone maps
  std::pair<double, double> gap_scale;
  std::pair<double, double> gap_exp;
  bool c1_control_fired = false;
  // batch ECDF at x0 = 0 in {0, 1} and {0, -1}
  double ecdf_b1 = 0.0;
  double ecdf_b2 = 0.0;
  bool c2_control_fired = false;
  // SoftSort near-tie sensitivity
  double near_tie_gap = 1e-4;
  double sharp_tau = 1e-3;
  double smooth_tau = 0.1;
  double ratio_sharp = 0.0;
  double ratio_smooth = 0.0;
  bool c3_control_fired = false;

  bool all_fired() const { return c1_control_fired && c2_control_fired && c3_control_fired; }
};

/// Counterexample operators that must each violate their axiom.
ControlsReport run_negative_controls(const ComplianceConfig& cfg);

}  // namespace admnorm
