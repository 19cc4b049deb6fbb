// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 7        run only criteria 3 and 7
//
// Exit status is 0 only when every selected criterion passed.

#include "admnorm/cli.hpp"
#include "admnorm/compliance.hpp"
#include "admnorm/csv.hpp"
#include "admnorm/learner.hpp"
#include "admnorm/metrics.hpp"
#include "admnorm/mlp.hpp"
#include "admnorm/operators.hpp"
#include "admnorm/rank_core.hpp"
#include "admnorm/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace admnorm;

namespace {

// Tolerances and bands, pinned.
constexpr std::uint64_t kSeeds = 10;
constexpr double kC1Exact = 1e-9;
constexpr double kC1BaselineCeiling = 0.95;
constexpr double kC1Margin = 0.05;
constexpr double kC1RuntimeS = 5.0;
constexpr double kC2BaselineLo = 5e-3;
constexpr double kC2BaselineHi = 1e-1;
constexpr double kC2RuntimeS = 30.0;
constexpr double kC3Lo = 0.15;
constexpr double kC3Hi = 0.26;
constexpr std::size_t kRankLipschitzPairs = 10000;
constexpr double kNearTieGrowth = 10.0;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kGradRuntimeS = 1.0;
constexpr double kModelCleanMin = 0.55;
constexpr double kModelSpreadMax = 0.10;
constexpr double kBaselineDropMin = 0.15;
constexpr double kModelRuntimeS = 120.0;
constexpr double kTabularSpearmanMin = 0.8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

OperatorConfig op_of(OperatorKind kind, int sinkhorn_iters = 15) {
  OperatorConfig op;
  op.kind = kind;
  op.sinkhorn_iters = sinkhorn_iters;
  return op;
}

ComplianceConfig seeded(std::uint64_t seed) {
  ComplianceConfig cfg;
  cfg.seed = seed;
  return cfg;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto data = c1_dataset(seeded(seed));
    for (const auto& tr : run_c1(op_of(OperatorKind::qnorm), data, stability_transforms())) {
      if (!tr.rho) return {false, "undefined rho for " + tr.transform};
      worst = std::max(worst, std::abs(1.0 - *tr.rho));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= kC1Exact && elapsed < kC1RuntimeS,
          "max |1 - rho| = " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

Outcome criterion2() {
  bool pass = true;
  std::ostringstream why;
  double min_margin = 1.0;
  double max_exp_rho = -1.0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto data = c1_dataset(seeded(seed));
    const auto q = run_c1(op_of(OperatorKind::qnorm), data, stability_transforms());
    for (OperatorKind kind : {OperatorKind::softsort, OperatorKind::sinkhorn}) {
      const auto b = run_c1(op_of(kind), data, stability_transforms());
      for (std::size_t i = 0; i < b.size(); ++i) {
        const double rb = b[i].rho.value_or(1.0);
        const double rq = q[i].rho.value_or(0.0);
        if (b[i].transform == "exp") {
          max_exp_rho = std::max(max_exp_rho, rb);
          if (rb >= kC1BaselineCeiling) {
            pass = false;
            why << " [seed " << seed << ' ' << to_string(kind) << " exp rho " << fmt(rb) << ']';
          }
        }
        if (rb < 1.0 - kC1Exact) {
          min_margin = std::min(min_margin, rq - rb);
          if (rq - rb < kC1Margin) {
            pass = false;
            why << " [seed " << seed << ' ' << to_string(kind) << ' ' << b[i].transform
                << " margin " << fmt(rq - rb) << ']';
          }
        }
      }
    }
  }
  return {pass, "max baseline exp rho = " + fmt(max_exp_rho) + ", min margin = " +
                    fmt(min_margin) + why.str()};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const ComplianceConfig cfg = seeded(0);
  const double vq = run_c2(op_of(OperatorKind::qnorm), cfg);
  const double vs = run_c2(op_of(OperatorKind::softsort), cfg);
  const double vk = run_c2(op_of(OperatorKind::sinkhorn), cfg);
  const double elapsed = seconds_since(t0);
  const auto in_band = [](double v) { return v >= kC2BaselineLo && v <= kC2BaselineHi; };
  return {vq == 0.0 && in_band(vs) && in_band(vk) && elapsed < kC2RuntimeS,
          "qnorm " + fmt(vq) + ", softsort " + fmt(vs) + ", sinkhorn " + fmt(vk) + ", " +
              fmt(elapsed) + " s"};
}

Outcome criterion4() {
  const ComplianceConfig cfg = seeded(0);
  const auto op = op_of(OperatorKind::qnorm);
  const C3Result c3 = run_c3(op, cfg);
  const double bound = c3_declared_bound(op, cfg);
  const bool pass = !c3.failure && c3.lipschitz_min >= kC3Lo && c3.lipschitz_max <= kC3Hi &&
                    c3.lipschitz_max <= bound;
  return {pass, "ratios [" + fmt(c3.lipschitz_min) + ", " + fmt(c3.lipschitz_max) +
                    "], bound " + fmt(bound)};
}

Outcome criterion5() {
  ComplianceConfig cfg = seeded(0);
  cfg.rank_lipschitz_pairs = kRankLipschitzPairs;
  const RankLipschitzResult r = verify_rank_lipschitz(op_of(OperatorKind::qnorm), cfg);
  return {r.pairs == kRankLipschitzPairs && r.holds(),
          std::to_string(r.violations) + " violations in " + std::to_string(r.pairs) +
              " pairs, max ratio " + fmt(r.max_ratio) + " vs " + fmt(r.bound)};
}

Outcome criterion6() {
  const auto gap = value_gap_pair(0.0, 1.0, MonotoneTransform::scale(2.5));
  const bool c1 = gap.first == 1.0 && gap.second == 2.5;
  const std::vector<double> b1{0.0, 1.0};
  const std::vector<double> b2{0.0, -1.0};
  const double e1 = batch_ecdf_apply(0.0, b1);
  const double e2 = batch_ecdf_apply(0.0, b2);
  const bool c2 = e1 == 0.5 && e2 == 1.0;
  const ControlsReport c = run_negative_controls(seeded(0));
  const bool c3 = c.ratio_sharp >= kNearTieGrowth * c.ratio_smooth && c.c3_control_fired;
  return {c1 && c2 && c3 && c.all_fired(),
          "gap " + fmt(gap.first) + " -> " + fmt(gap.second) + ", ecdf " + fmt(e1) + " vs " +
              fmt(e2) + ", near-tie ratio " + fmt(c.ratio_sharp) + " vs " + fmt(c.ratio_smooth)};
}

// Central differences over every parameter, compared with mlp_backward.
Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  MlpState net = make_mlp({3, 4, 1}, 7);
  Rng rng = Rng::stream(7, "acceptance/grad");
  Eigen::MatrixXd x(8, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Eigen::VectorXd y(8);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.normal();
  // Shift biases away from zero so no ReLU kink sits within the step.
  for (auto& b : net.biases) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.1 + 0.05 * static_cast<double>(i);
  }
  constexpr double wd = 1e-3;
  const Gradients g = mlp_backward(net, mlp_forward_cached(net, x), y, wd);

  double worst = 0.0;
  std::size_t checked = 0;
  const auto check = [&](double& param, double analytic) {
    const double keep = param;
    param = keep + kGradStep;
    const double up = mlp_loss(net, x, y, wd);
    param = keep - kGradStep;
    const double down = mlp_loss(net, x, y, wd);
    param = keep;
    const double numeric = (up - down) / (2.0 * kGradStep);
    const double rel = std::abs(numeric - analytic) / std::max(1e-8, std::abs(numeric) + std::abs(analytic));
    worst = std::max(worst, rel);
    ++checked;
  };
  for (std::size_t k = 0; k < net.layers(); ++k) {
    for (Eigen::Index i = 0; i < net.weights[k].size(); ++i) {
      check(net.weights[k].data()[i], g.weights[k].data()[i]);
    }
    for (Eigen::Index i = 0; i < net.biases[k].size(); ++i) {
      check(net.biases[k][i], g.biases[k][i]);
    }
  }
  const double elapsed = seconds_since(t0);
  return {checked == net.parameter_count() && worst <= kGradRelTol && elapsed < kGradRuntimeS,
          std::to_string(checked) + " parameters, max relative error " + fmt(worst) + ", " +
              fmt(elapsed) + " s"};
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const RobustnessConfig cfg;
  const auto transforms = model_shift_transforms();
  const RobustnessResult q = run_model_robustness(op_of(OperatorKind::qnorm, 10), cfg, transforms);
  std::ostringstream d;
  std::ostringstream order;
  bool pass = true;

  const double clean = q.clean.spearman.value_or(-1.0);
  bool order_identical = true;
  std::vector<double> first_ranks;
  for (const auto& s : q.shifts) {
    const auto ranks = midranks(s.predictions);
    if (first_ranks.empty()) {
      first_ranks = ranks;
    } else if (ranks != first_ranks) {
      order_identical = false;
      order << " [under " << s.transform << ']';
    }
  }
  double shifted_lo = 1.0, shifted_hi = -1.0;
  for (const auto& s : q.shifts) {
    shifted_lo = std::min(shifted_lo, s.metrics.spearman.value_or(-1.0));
    shifted_hi = std::max(shifted_hi, s.metrics.spearman.value_or(-1.0));
  }
  const double spread = shifted_hi - shifted_lo;
  pass = pass && clean > kModelCleanMin && spread <= kModelSpreadMax && order_identical;
  d << "qnorm clean " << fmt(clean) << ", spread " << fmt(spread) << ", order "
    << (order_identical ? "identical" : "differs") << order.str();

  for (OperatorKind kind : {OperatorKind::softsort, OperatorKind::sinkhorn}) {
    const RobustnessResult b = run_model_robustness(op_of(kind, 10), cfg, transforms);
    const double bc = b.clean.spearman.value_or(0.0);
    double drop = -1.0;
    for (const auto& s : b.shifts) drop = std::max(drop, bc - s.metrics.spearman.value_or(0.0));
    d << "; " << to_string(kind) << " clean " << fmt(bc) << ", max drop " << fmt(drop);
    pass = pass && drop >= kBaselineDropMin;
  }
  const double elapsed = seconds_since(t0);
  d << "; " << fmt(elapsed) << " s";
  return {pass && elapsed < kModelRuntimeS, d.str()};
}

Outcome criterion9() {
  const TaskData task = gen_synthetic_task(1000, 6, 0);
  std::stringstream csv;
  write_task_csv(csv, task);
  const CsvData data = parse_csv(csv, "y");
  TabularConfig cfg;
  const TabularResult a = run_tabular_protocol(data.x, data.y, cfg);
  const TabularResult b = run_tabular_protocol(data.x, data.y, cfg);
  const bool deterministic = a.split.train == b.split.train && a.split.test == b.split.test &&
                             a.epoch_losses == b.epoch_losses && a.test_mse == b.test_mse;
  const double rho = a.test_spearman.value_or(-1.0);
  return {rho > kTabularSpearmanMin && deterministic,
          "test spearman " + fmt(rho) + ", deterministic " + (deterministic ? "yes" : "no")};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion10() {
  const auto base = std::filesystem::temp_directory_path() / "admnorm_acceptance_determinism";
  std::filesystem::remove_all(base);
  std::vector<std::string> reports;
  std::vector<std::string> metrics;
  for (int run = 0; run < 2; ++run) {
    const std::string dir = (base / ("run" + std::to_string(run))).string();
    const char* argv[] = {"admnorm", "stability", "--seed", "0", "--out", dir.c_str()};
    std::ostringstream out, err;
    const int code = run_cli(6, argv, out, err);
    if (code != 0) return {false, "stability exited " + std::to_string(code) + ": " + err.str()};
    reports.push_back(slurp(dir + "/stability_report.json"));
    metrics.push_back(slurp(dir + "/stability_metrics.csv"));
  }
  std::filesystem::remove_all(base);
  const bool same = !reports[0].empty() && reports[0] == reports[1] && metrics[0] == metrics[1];
  return {same, std::to_string(reports[0].size()) + " + " + std::to_string(metrics[0].size()) +
                    " bytes, identical " + (same ? "yes" : "no")};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> table = {
      {1, {"monotone invariance is exact for qnorm", criterion1}},
      {2, {"baselines break monotone invariance", criterion2}},
      {3, {"batch independence", criterion3}},
      {4, {"qnorm Lipschitz ratios within band and bound", criterion4}},
      {5, {"qnorm rank-space Lipschitz property", criterion5}},
      {6, {"negative controls fire", criterion6}},
      {7, {"MLP gradients match finite differences", criterion7}},
      {8, {"model-level shift robustness", criterion8}},
      {9, {"tabular protocol", criterion9}},
      {10, {"stability reports are byte-identical", criterion10}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [id, entry] : criteria()) selected.push_back(id);
  }

  bool all = true;
  for (int id : selected) {
    const auto it = criteria().find(id);
    if (it == criteria().end()) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << it->second.first
              << " | " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
