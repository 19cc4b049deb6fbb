#include "admnorm/operators.hpp"
#include "admnorm/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace admnorm {
namespace {

OperatorConfig cfg_of(OperatorKind kind) {
  OperatorConfig c;
  c.kind = kind;
  return c;
}

NormalizationStats unit_stats(double mu = 0.0, double sigma = 1.0) {
  return {Eigen::VectorXd::Constant(1, mu), Eigen::VectorXd::Constant(1, sigma)};
}

TEST(QNorm, MidpointAndClosedForm) {
  const OperatorConfig c = cfg_of(OperatorKind::qnorm);
  const auto out = qnorm_apply(FeatureMatrix::column(std::vector<double>{3.0, 5.0}),
                               unit_stats(3.0, 2.0), c);
  EXPECT_DOUBLE_EQ(out.data(0, 0), 0.5);
  const double oracle = (1.0 / (1.0 + std::exp(-1.0))) * (1.0 - 2e-6) + 1e-6;
  EXPECT_NEAR(out.data(1, 0), oracle, 1e-15);
  EXPECT_NEAR(out.data(1, 0), 0.7310581, 1e-7);
}

TEST(QNorm, ClampBounds) {
  const OperatorConfig c = cfg_of(OperatorKind::qnorm);
  const auto out = qnorm_apply(FeatureMatrix::column(std::vector<double>{-1e6, 1e6}),
                               unit_stats(), c);
  EXPECT_DOUBLE_EQ(out.data(0, 0), 1e-6);
  EXPECT_DOUBLE_EQ(out.data(1, 0), 1.0 - 1e-6);
}

TEST(QNorm, DimensionMismatchThrows) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_THROW(qnorm_apply(FeatureMatrix(m), unit_stats(), cfg_of(OperatorKind::qnorm)),
               ShapeError);
}

TEST(QNorm, OutputsStayInClampedInterval) {
  Rng rng = Rng::stream(0, "test/qnorm-range");
  Eigen::MatrixXd m(400, 3);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 50.0 * rng.normal();
  const FeatureMatrix x(m);
  const OperatorConfig c = cfg_of(OperatorKind::qnorm);
  const auto out = qnorm_apply(x, fit_stats(x), c);
  EXPECT_GE(out.data.minCoeff(), c.epsilon_out);
  EXPECT_LE(out.data.maxCoeff(), 1.0 - c.epsilon_out);
}

TEST(QNormScalarize, ZeroWeightsGiveHalf) {
  const RankRepresentation r{Eigen::MatrixXd::Constant(4, 3, 0.7), RankKind::relaxed};
  const std::vector<double> w(3, 0.0);
  const auto out = qnorm_scalarize(r, w, cfg_of(OperatorKind::qnorm));
  ASSERT_EQ(out.data.cols(), 1);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(out.data(i, 0), 0.5);
}

TEST(QNormScalarize, SingleFeatureClosedForm) {
  OperatorConfig c = cfg_of(OperatorKind::qnorm);
  c.epsilon_out = 0.0;
  const RankRepresentation r{Eigen::MatrixXd::Constant(1, 1, 0.5), RankKind::relaxed};
  const std::vector<double> w{1.0};
  EXPECT_NEAR(qnorm_scalarize(r, w, c).data(0, 0), 1.0 / (1.0 + std::exp(-0.5)), 1e-15);
  EXPECT_NEAR(qnorm_scalarize(r, w, c).data(0, 0), 0.6224593, 1e-7);
}

TEST(QNormScalarize, RejectsNegativeWeightAndWrongLength) {
  const RankRepresentation r{Eigen::MatrixXd::Constant(2, 2, 0.5), RankKind::relaxed};
  const OperatorConfig c = cfg_of(OperatorKind::qnorm);
  EXPECT_THROW(qnorm_scalarize(r, std::vector<double>{1.0, -0.1}, c), std::invalid_argument);
  EXPECT_THROW(qnorm_scalarize(r, std::vector<double>{1.0}, c), ShapeError);
}

TEST(QNormScalarize, MonotoneInEveryRankCoordinate) {
  Rng rng = Rng::stream(0, "test/scalarize");
  const auto w = uniform_weights(3);
  const OperatorConfig c = cfg_of(OperatorKind::qnorm);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd a(1, 3);
    for (int j = 0; j < 3; ++j) a(0, j) = rng.uniform();
    Eigen::MatrixXd b = a;
    b(0, static_cast<Eigen::Index>(rng.below(3))) += 0.01;
    const double qa = qnorm_scalarize({a, RankKind::relaxed}, w, c).data(0, 0);
    const double qb = qnorm_scalarize({b, RankKind::relaxed}, w, c).data(0, 0);
    EXPECT_GT(qb, qa);
  }
}

TEST(UnitLinspace, Endpoints) {
  EXPECT_EQ(unit_linspace(1)[0], 0.0);
  const auto v = unit_linspace(5);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[4], 1.0);
  EXPECT_DOUBLE_EQ(v[1], 0.25);
}

TEST(SoftSort, ConstantColumnIsUniform) {
  const auto r = softsort_apply(std::vector<double>{2.0, 2.0}, cfg_of(OperatorKind::softsort));
  EXPECT_DOUBLE_EQ(r.outputs[0], 0.5);
  EXPECT_DOUBLE_EQ(r.outputs[1], 0.5);
  EXPECT_EQ(r.permutation.kind, PermutationKind::row_stochastic);
}

TEST(SoftSort, TwoPointOracle) {
  // Two-term softmax with gap^2 / tau = 10.
  const double off = std::exp(-10.0) / (1.0 + std::exp(-10.0));
  const auto r = softsort_apply(std::vector<double>{0.0, 1.0}, cfg_of(OperatorKind::softsort));
  EXPECT_NEAR(r.outputs[0], off, 1e-15);
  EXPECT_NEAR(r.outputs[1], 1.0 - off, 1e-15);
  EXPECT_NEAR(r.outputs[0], 4.5398e-5, 1e-9);
  EXPECT_NEAR(r.outputs[1], 0.9999546, 1e-7);
}

TEST(SoftSort, SingletonAndEmpty) {
  EXPECT_EQ(softsort_apply(std::vector<double>{3.0}, cfg_of(OperatorKind::softsort)).outputs,
            std::vector<double>{0.0});
  EXPECT_THROW(softsort_apply(std::vector<double>{}, cfg_of(OperatorKind::softsort)),
               std::invalid_argument);
}

TEST(SoftSort, RowsSumToOneAndOutputsMatchMatrix) {
  Rng rng = Rng::stream(0, "test/softsort-rows");
  for (int trial = 0; trial < 20; ++trial) {
    auto col = rng.normals(2 + rng.below(60));
    for (double& v : col) v *= 10.0;
    const auto c = cfg_of(OperatorKind::softsort);
    const auto r = softsort_apply(col, c);
    const Eigen::VectorXd sums = r.permutation.matrix.rowwise().sum();
    for (Eigen::Index i = 0; i < sums.size(); ++i) EXPECT_NEAR(sums[i], 1.0, 1e-9);
    const auto fast = softsort_outputs(col, c);
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast[i], r.outputs[i], 1e-12);
  }
}

TEST(Sinkhorn, ConstantColumn) {
  const auto r = sinkhorn_apply(std::vector<double>{1.0, 1.0}, cfg_of(OperatorKind::sinkhorn));
  EXPECT_EQ(r.permutation.kind, PermutationKind::doubly_stochastic_approx);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(r.permutation.matrix(i, j), 0.5, 1e-15);
  }
  EXPECT_NEAR(r.outputs[0], 0.5, 1e-15);
  EXPECT_NEAR(r.outputs[1], 0.5, 1e-15);
}

TEST(Sinkhorn, FarPointsGiveIdentity) {
  const auto r = sinkhorn_apply(std::vector<double>{0.0, 10.0}, cfg_of(OperatorKind::sinkhorn));
  EXPECT_NEAR(r.outputs[0], 0.0, 1e-6);
  EXPECT_NEAR(r.outputs[1], 1.0, 1e-6);
  EXPECT_NEAR(r.permutation.matrix(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(r.permutation.matrix(1, 1), 1.0, 1e-6);
}

TEST(Sinkhorn, Singleton) {
  EXPECT_EQ(sinkhorn_apply(std::vector<double>{4.0}, cfg_of(OperatorKind::sinkhorn)).outputs,
            std::vector<double>{0.0});
}

// Independent loop-based iteration: u = 1 / (K v), v = 1 / (K^T u), from v = 1.
std::vector<double> sinkhorn_oracle(const std::vector<double>& x, double eps, int iters) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      k[i][j] = std::max(std::exp(-std::abs(x[i] - x[j]) / eps), 1e-30);
    }
  }
  std::vector<double> u(n, 1.0), v(n, 1.0);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += k[i][j] * v[j];
      u[i] = 1.0 / s;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i][j] * u[i];
      v[j] = 1.0 / s;
    }
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i] += u[i] * k[i][j] * v[j] * static_cast<double>(j) / static_cast<double>(n - 1);
    }
  }
  return out;
}

TEST(Sinkhorn, MatchesLoopOracle) {
  Rng rng = Rng::stream(0, "test/sinkhorn-oracle");
  const auto c = cfg_of(OperatorKind::sinkhorn);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> col(2 + rng.below(30));
    for (double& v : col) v = 3.0 * rng.normal();
    const auto got = sinkhorn_apply(col, c).outputs;
    const auto want = sinkhorn_oracle(col, c.sinkhorn_epsilon, c.sinkhorn_iters);
    for (std::size_t i = 0; i < col.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-10);
  }
}

TEST(Sinkhorn, MarginalsConvergeOnCloseColumns) {
  // Pairwise gaps <= 2 eps. Wider columns converge more slowly than 15 iterations allow.
  Rng rng = Rng::stream(0, "test/sinkhorn-marginals");
  const auto c = cfg_of(OperatorKind::sinkhorn);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> col(2 + rng.below(80));
    for (double& v : col) v = 0.2 * rng.uniform();
    const auto p = sinkhorn_apply(col, c).permutation.matrix;
    const Eigen::VectorXd rows = p.rowwise().sum();
    const Eigen::VectorXd cols = p.colwise().sum().transpose();
    for (Eigen::Index i = 0; i < rows.size(); ++i) {
      EXPECT_NEAR(rows[i], 1.0, 1e-3);
      EXPECT_NEAR(cols[i], 1.0, 1e-3);
    }
  }
}

TEST(Sinkhorn, NonFiniteReportsIteration) {
  OperatorConfig c = cfg_of(OperatorKind::sinkhorn);
  c.sinkhorn_epsilon = 1e-300;
  try {
    sinkhorn_apply(std::vector<double>{0.0, 1e-10, 1.0}, c);
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
    return;
  }
  SUCCEED() << "floored kernel stayed finite";
}

TEST(BatchEcdf, WorkedValues) {
  const std::vector<double> b{0.5, 2.0};
  EXPECT_DOUBLE_EQ(batch_ecdf_apply(0.5, b), 0.5);
  EXPECT_DOUBLE_EQ(batch_ecdf_apply(2.0, b), 1.0);
  EXPECT_DOUBLE_EQ(batch_ecdf_apply(5.0, std::vector<double>{5.0}), 1.0);
  EXPECT_THROW(batch_ecdf_apply(0.0, std::vector<double>{}), std::invalid_argument);
}

TEST(ValueGapPair, Examples) {
  EXPECT_EQ(value_gap_pair(0, 1, MonotoneTransform::identity()), std::make_pair(1.0, 1.0));
  EXPECT_EQ(value_gap_pair(0, 1, MonotoneTransform::scale(2.5)), std::make_pair(1.0, 2.5));
  EXPECT_EQ(value_gap_pair(0, 0, MonotoneTransform::exp01()), std::make_pair(0.0, 0.0));
}

TEST(OperatorConfig, ValidateAndNames) {
  OperatorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = OperatorConfig{};
  c.epsilon_out = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = OperatorConfig{};
  c.sinkhorn_iters = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  for (auto k : {OperatorKind::qnorm, OperatorKind::softsort, OperatorKind::sinkhorn,
                 OperatorKind::batch_ecdf, OperatorKind::value_gap_pair}) {
    EXPECT_EQ(operator_from_name(to_string(k)), k);
  }
  EXPECT_THROW(operator_from_name("zscore"), std::invalid_argument);
}

TEST(FeatureOperator, QNormNeedsFitAndIsPointwise) {
  FeatureOperator op(cfg_of(OperatorKind::qnorm));
  const auto ref = FeatureMatrix::column(std::vector<double>{-1.0, 0.0, 1.0, 2.0});
  EXPECT_THROW(op.apply(ref), std::logic_error);
  op.fit(ref);
  ASSERT_TRUE(op.stats().has_value());
  const auto full = op.apply(ref);
  const auto one = op.apply(FeatureMatrix::column(std::vector<double>{1.0}));
  EXPECT_EQ(full.data(2, 0), one.data(0, 0));
}

TEST(FeatureOperator, BatchOperatorsActPerColumn) {
  Eigen::MatrixXd m(3, 2);
  m << 0, 5, 1, 6, 2, 7;
  for (auto kind : {OperatorKind::softsort, OperatorKind::sinkhorn}) {
    FeatureOperator op(cfg_of(kind));
    const auto out = op.apply(FeatureMatrix(m));
    // Column 1 is column 0 shifted, and both operators depend only on gaps.
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(out.data(i, 0), out.data(i, 1), 1e-12);
  }
}

TEST(FeatureOperator, RefitModeIsBatchDependent) {
  FeatureOperator frozen(cfg_of(OperatorKind::qnorm));
  FeatureOperator refit(cfg_of(OperatorKind::qnorm), StatsMode::refit_per_batch_inadmissible);
  const auto ref = FeatureMatrix::column(std::vector<double>{-1.0, 0.0, 1.0});
  frozen.fit(ref);
  refit.fit(ref);
  const auto b1 = FeatureMatrix::column(std::vector<double>{0.0, 1.0});
  const auto b2 = FeatureMatrix::column(std::vector<double>{0.0, -1.0});
  EXPECT_EQ(frozen.apply(b1).data(0, 0), frozen.apply(b2).data(0, 0));
  EXPECT_GT(std::abs(refit.apply(b1).data(0, 0) - refit.apply(b2).data(0, 0)), 1e-3);
}

TEST(FeatureOperator, BaselineBatchSensitivity) {
  for (auto kind : {OperatorKind::softsort, OperatorKind::sinkhorn}) {
    FeatureOperator op(cfg_of(kind));
    const double a = op.apply(FeatureMatrix::column(std::vector<double>{0.0, 0.2, 0.4})).data(0, 0);
    const double b = op.apply(FeatureMatrix::column(std::vector<double>{0.0, 1.0, 2.0})).data(0, 0);
    EXPECT_GT(std::abs(a - b), 1e-3) << to_string(kind);
  }
}

TEST(FeatureOperator, RejectsCounterexampleKinds) {
  EXPECT_THROW(FeatureOperator(cfg_of(OperatorKind::batch_ecdf)), std::invalid_argument);
}

}  // namespace
}  // namespace admnorm
