#include "admnorm/cli.hpp"

#include "admnorm/csv.hpp"
#include "admnorm/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <future>
#include <memory>
#include <optional>
#include <sstream>

namespace admnorm {

namespace {

constexpr const char* kSubcommands[] = {"comply", "stability", "robustness", "tabular",
                                        "controls"};

struct Settings {
  std::uint64_t seed = 0;
  std::vector<std::string> operators;
  double tau = 0.1;
  double sinkhorn_eps = 0.1;
  std::optional<int> sinkhorn_iters;
  double epsilon_out = 1e-6;
  std::string out_dir = "reports";

  // compliance
  ComplianceConfig compliance;
  double probe_lo = -1.0;
  double probe_hi = 1.0;
  std::size_t probe_count = 64;

  // robustness
  RobustnessConfig robustness;
  bool frozen_stats = false;

  // tabular
  std::string csv_path;
  std::string target;
  std::vector<std::string> columns;
  TabularConfig tabular;
  std::string emit_synthetic;
  std::size_t synthetic_rows = 1000;
  std::size_t synthetic_features = 6;
};

void add_common(CLI::App* sub, Settings& s, bool with_operator) {
  sub->add_option("--seed", s.seed, "Master seed")->capture_default_str();
  if (with_operator) {
    sub->add_option("--operator", s.operators, "Operators: qnorm, softsort, sinkhorn")
        ->check(CLI::IsMember({"qnorm", "softsort", "sinkhorn"}))
        ->delimiter(',');
  }
  sub->add_option("--tau", s.tau, "SoftSort temperature")->capture_default_str();
  sub->add_option("--sinkhorn-eps", s.sinkhorn_eps, "Sinkhorn entropic regularization")
      ->capture_default_str();
  sub->add_option("--sinkhorn-iters", s.sinkhorn_iters,
                  "Sinkhorn iterations (default 15 for audits, 10 for robustness)");
  sub->add_option("--epsilon-out", s.epsilon_out, "QNorm output clamp")->capture_default_str();
  sub->add_option("--out", s.out_dir, "Output directory")->capture_default_str();
}

void add_compliance_options(CLI::App* sub, Settings& s) {
  auto& c = s.compliance;
  sub->add_option("--n-samples", c.n_samples, "Samples for the invariance audit")
      ->capture_default_str();
  sub->add_option("--population-size", c.population_size, "Population for batch draws")
      ->capture_default_str();
  sub->add_option("--n-batches", c.n_batches, "Batches containing the probe")
      ->capture_default_str();
  sub->add_option("--batch-size", c.batch_size, "Batch size")->capture_default_str();
  sub->add_option("--eps-perturb", c.eps_perturb, "Forward-difference step")
      ->capture_default_str();
  sub->add_option("--grad-h", c.grad_h, "Central-difference step")->capture_default_str();
  sub->add_option("--probe-x0", c.probe_x0, "Fixed probe sample for batch independence")
      ->capture_default_str();
  sub->add_option("--probe-lo", s.probe_lo, "Stability probe grid start")->capture_default_str();
  sub->add_option("--probe-hi", s.probe_hi, "Stability probe grid end")->capture_default_str();
  sub->add_option("--probe-count", s.probe_count, "Stability probe grid size")
      ->capture_default_str();
  sub->add_option("--rank-lipschitz-pairs", c.rank_lipschitz_pairs, "Random pairs for the Lipschitz bound")
      ->capture_default_str();
}

void add_train_options(CLI::App* sub, TrainConfig& t) {
  sub->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  sub->add_option("--lr", t.lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--weight-decay", t.weight_decay, "Coupled L2 weight decay")
      ->capture_default_str();
}

struct Cli {
  CLI::App app{"Rank-based input normalization audits and experiments", "admnorm"};
  Settings s;
  std::map<std::string, CLI::App*> subs;

  Cli() {
    app.require_subcommand(1);
    subs["comply"] = app.add_subcommand("comply", "Admissibility audit (C1/C2/C3) with verdicts");
    subs["stability"] =
        app.add_subcommand("stability", "Operator stability table for all operators");
    subs["robustness"] = app.add_subcommand("robustness", "Model-level shift robustness");
    subs["tabular"] = app.add_subcommand("tabular", "Tabular regression protocol on a CSV");
    subs["controls"] = app.add_subcommand("controls", "Counterexample negative controls");

    for (const char* name : {"comply", "stability"}) {
      add_common(subs[name], s, std::string(name) == "comply");
      add_compliance_options(subs[name], s);
    }

    auto* rob = subs["robustness"];
    add_common(rob, s, true);
    rob->add_option("--n", s.robustness.n, "Training rows")->capture_default_str();
    rob->add_option("--n-test", s.robustness.n_test, "Fresh test rows")->capture_default_str();
    rob->add_option("--d", s.robustness.d, "Features")->capture_default_str();
    rob->add_option("--hidden", s.robustness.hidden, "Hidden width")->capture_default_str();
    rob->add_flag("--frozen-stats", s.frozen_stats,
                  "Keep clean operator context under shifts instead of refitting");
    add_train_options(rob, s.robustness.train);

    auto* tab = subs["tabular"];
    add_common(tab, s, false);
    tab->add_option("--csv", s.csv_path, "Input CSV (header row, numeric cells)");
    tab->add_option("--target", s.target, "Target column")->required();
    tab->add_option("--columns", s.columns, "Feature columns (default: all numeric)")
        ->delimiter(',');
    tab->add_option("--test-ratio", s.tabular.test_ratio, "Held-out fraction")
        ->capture_default_str();
    tab->add_option("--emit-synthetic", s.emit_synthetic,
                    "Write the synthetic latent-ranking task to this CSV first and use it");
    tab->add_option("--synthetic-rows", s.synthetic_rows, "Rows of the synthetic CSV")
        ->capture_default_str();
    tab->add_option("--synthetic-features", s.synthetic_features, "Features of the synthetic CSV")
        ->capture_default_str();
    add_train_options(tab, s.tabular.train);

    add_common(subs["controls"], s, false);
  }
};

OperatorConfig make_operator(const Settings& s, const std::string& name, int default_iters) {
  OperatorConfig op;
  op.kind = operator_from_name(name);
  op.tau = s.tau;
  op.sinkhorn_epsilon = s.sinkhorn_eps;
  op.sinkhorn_iters = s.sinkhorn_iters.value_or(default_iters);
  op.epsilon_out = s.epsilon_out;
  op.validate();
  return op;
}

nlohmann::json operator_json(const OperatorConfig& op) {
  return {{"kind", to_string(op.kind)},
          {"epsilon_out", op.epsilon_out},
          {"tau", op.tau},
          {"sinkhorn_epsilon", op.sinkhorn_epsilon},
          {"sinkhorn_iters", op.sinkhorn_iters},
          {"weights", op.weights ? nlohmann::json(*op.weights) : nlohmann::json(nullptr)}};
}

nlohmann::json compliance_json(const ComplianceConfig& c) {
  return {{"n_samples", c.n_samples},
          {"population_size", c.population_size},
          {"n_batches", c.n_batches},
          {"batch_size", c.batch_size},
          {"eps_perturb", c.eps_perturb},
          {"grad_h", c.grad_h},
          {"probe_x0", c.probe_x0},
          {"probe_lo", c.probe_grid.front()},
          {"probe_hi", c.probe_grid.back()},
          {"probe_count", c.probe_grid.size()},
          {"rank_lipschitz_pairs", c.rank_lipschitz_pairs},
          {"seed", c.seed}};
}

nlohmann::json train_json(const TrainConfig& t) {
  return {{"lr", t.lr},
          {"epochs", t.epochs},
          {"weight_decay", t.weight_decay},
          {"weight_decay_mode", "coupled L2 on all parameters"},
          {"adam_beta1", t.adam.beta1},
          {"adam_beta2", t.adam.beta2},
          {"adam_eps", t.adam.eps},
          {"batch", "full"},
          {"loss", "mse"},
          {"init", "xavier-uniform weights, zero biases"},
          {"seed", t.seed}};
}

nlohmann::json common_json(const Settings& s) {
  return {{"seed", s.seed},
          {"tau", s.tau},
          {"sinkhorn_eps", s.sinkhorn_eps},
          {"epsilon_out", s.epsilon_out},
          {"sinkhorn_iters", s.sinkhorn_iters ? nlohmann::json(*s.sinkhorn_iters)
                                              : nlohmann::json("operator default")},
          {"rng_algorithm", kRngAlgorithm},
          {"std_convention", "population (divide by n) + 1e-6"}};
}

nlohmann::json verdict_json(const Verdict& v, bool expected_pass) {
  return {{"pass", v.pass}, {"reason", v.reason}, {"expected_pass", expected_pass}};
}

std::string summary_line(const ComplianceReport& r) {
  std::ostringstream line;
  line << to_string(r.op.kind) << ": C1 " << (r.c1_verdict.pass ? "pass" : "FAIL") << ", C2 "
       << (r.c2_verdict.pass ? "pass" : "FAIL") << ", C3 "
       << (r.c3_verdict.pass ? "pass" : "FAIL") << " -> "
       << (r.admissible() ? "admissible" : "inadmissible");
  return line.str();
}

}  // namespace

ExperimentReport run_compliance_experiment(std::string subcommand,
                                           const std::vector<OperatorConfig>& ops,
                                           const ComplianceConfig& cfg) {
  ExperimentReport rep;
  rep.subcommand = std::move(subcommand);
  rep.config["compliance"] = compliance_json(cfg);
  rep.config["operators"] = nlohmann::json::array();
  for (const auto& op : ops) {
    rep.config["operators"].push_back(operator_json(op));
    const ComplianceReport r = run_compliance(op, cfg);
    const std::string name = to_string(op.kind);

    for (const auto& tr : r.c1) rep.add("c1", name, tr.transform, "spearman_rho", tr.rho);
    rep.add("c2", name, "", "variance_at_probe", r.c2_variance);
    rep.add("c3", name, "", "lipschitz_min", r.c3.lipschitz_min);
    rep.add("c3", name, "", "lipschitz_max", r.c3.lipschitz_max);
    rep.add("c3", name, "", "grad_min", r.c3.grad_min);
    rep.add("c3", name, "", "grad_max", r.c3.grad_max);
    rep.add("c3", name, "", "declared_bound", r.c3_bound);

    const bool expect_admissible = op.kind == OperatorKind::qnorm;
    nlohmann::json v;
    v["c1"] = verdict_json(r.c1_verdict, expect_admissible);
    v["c2"] = verdict_json(r.c2_verdict, expect_admissible);
    v["c3"] = verdict_json(r.c3_verdict, expect_admissible);
    v["admissible"] = r.admissible();
    v["expected"] = expect_admissible ? "admissible" : "inadmissible";
    bool as_expected = r.admissible() == expect_admissible;
    if (r.rank_lipschitz) {
      rep.add("rank_lipschitz", name, "", "pairs", static_cast<double>(r.rank_lipschitz->pairs));
      rep.add("rank_lipschitz", name, "", "violations", static_cast<double>(r.rank_lipschitz->violations));
      rep.add("rank_lipschitz", name, "", "max_ratio", r.rank_lipschitz->max_ratio);
      rep.add("rank_lipschitz", name, "", "bound", r.rank_lipschitz->bound);
      v["rank_lipschitz_holds"] = r.rank_lipschitz->holds();
      as_expected = as_expected && r.rank_lipschitz->holds();
    }
    v["as_expected"] = as_expected;
    rep.verdicts[name] = std::move(v);
    rep.details[name] = r.metadata;
    rep.details[name]["summary"] = summary_line(r);
  }
  return rep;
}

ExperimentReport run_controls_experiment(const ComplianceConfig& cfg) {
  const ControlsReport c = run_negative_controls(cfg);
  ExperimentReport rep;
  rep.subcommand = "controls";
  rep.add("controls", "value-gap-pair", "scale", "gap_before", c.gap_scale.first);
  rep.add("controls", "value-gap-pair", "scale", "gap_after", c.gap_scale.second);
  rep.add("controls", "value-gap-pair", "exp", "gap_before", c.gap_exp.first);
  rep.add("controls", "value-gap-pair", "exp", "gap_after", c.gap_exp.second);
  rep.add("controls", "batch-ecdf", "", "probe_in_b1", c.ecdf_b1);
  rep.add("controls", "batch-ecdf", "", "probe_in_b2", c.ecdf_b2);
  rep.add("controls", "softsort", "", "near_tie_ratio_sharp_tau", c.ratio_sharp);
  rep.add("controls", "softsort", "", "near_tie_ratio_smooth_tau", c.ratio_smooth);
  rep.config["controls"] = {{"near_tie_gap", c.near_tie_gap},
                            {"sharp_tau", c.sharp_tau},
                            {"smooth_tau", c.smooth_tau},
                            {"ecdf_b1", {0.0, 1.0}},
                            {"ecdf_b2", {0.0, -1.0}},
                            {"ecdf_probe", 0.0}};
  rep.verdicts["c1_control"] = {{"fired", c.c1_control_fired}, {"as_expected", c.c1_control_fired}};
  rep.verdicts["c2_control"] = {{"fired", c.c2_control_fired}, {"as_expected", c.c2_control_fired}};
  rep.verdicts["c3_control"] = {{"fired", c.c3_control_fired}, {"as_expected", c.c3_control_fired}};
  rep.details["ecdf_convention"] =
      "(1/|B|) #{y in B : y <= x}; matches the worked counterexample values";
  return rep;
}

ExperimentReport run_robustness_experiment(const std::vector<OperatorConfig>& ops,
                                           const RobustnessConfig& cfg) {
  const auto transforms = model_shift_transforms();
  std::vector<std::future<RobustnessResult>> cells;
  for (const auto& op : ops) {
    cells.push_back(std::async(std::launch::async, [&cfg, &transforms, op] {
      return run_model_robustness(op, cfg, transforms);
    }));
  }

  ExperimentReport rep;
  rep.subcommand = "robustness";
  rep.config["robustness"] = {{"n", cfg.n},
                              {"n_test", cfg.n_test},
                              {"d", cfg.d},
                              {"hidden", cfg.hidden},
                              {"refit_on_shift", cfg.refit_on_shift},
                              {"test_set", "fresh rows from the same latent task"},
                              {"ndcg", "k = test size, relevance = min-max target"}};
  rep.config["train"] = train_json(cfg.train);
  rep.config["operators"] = nlohmann::json::array();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const RobustnessResult r = cells[i].get();
    const std::string name = to_string(ops[i].kind);
    rep.config["operators"].push_back(operator_json(ops[i]));

    rep.add("robustness", name, "clean", "ndcg", r.clean.ndcg);
    rep.add("robustness", name, "clean", "spearman", r.clean.spearman);
    nlohmann::json order = nlohmann::json::object();
    for (const auto& ev : r.shifts) {
      rep.add("robustness", name, ev.transform, "ndcg", ev.metrics.ndcg);
      rep.add("robustness", name, ev.transform, "spearman", ev.metrics.spearman);
      rep.add("robustness", name, ev.transform, "operator_shift", ev.operator_shift);
      order[ev.transform] = midranks(ev.predictions) == midranks(r.clean_predictions);
    }
    rep.add("training", name, "", "loss_initial", r.epoch_losses.front());
    rep.add("training", name, "", "loss_final", r.epoch_losses.back());

    const bool in_unit = r.input_min >= 0.0 && r.input_max <= 1.0;
    const bool decreased = r.epoch_losses.back() < r.epoch_losses.front();
    rep.verdicts[name] = {
        {"inputs_in_unit_interval", in_unit},
        {"loss_decreased", decreased},
        {"as_expected", in_unit && decreased},
    };
    rep.details[name] = {{"epoch_losses", r.epoch_losses},
                         {"input_min", r.input_min},
                         {"input_max", r.input_max},
                         {"prediction_order_matches_clean", order}};
  }
  return rep;
}

bool verdicts_as_expected(const ExperimentReport& report) {
  for (const auto& [key, v] : report.verdicts.items()) {
    if (v.is_object() && v.contains("as_expected") && !v["as_expected"].get<bool>()) return false;
  }
  return true;
}

std::vector<std::string> cli_option_names(std::string_view subcommand) {
  Cli cli;
  const auto it = cli.subs.find(std::string(subcommand));
  if (it == cli.subs.end()) throw std::invalid_argument("unknown subcommand");
  std::vector<std::string> names;
  for (const CLI::Option* opt : it->second->get_options()) {
    for (const auto& l : opt->get_lnames()) names.push_back(l);
  }
  std::sort(names.begin(), names.end());
  return names;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Cli cli;
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Settings& s = cli.s;
  std::string sub;
  for (const char* name : kSubcommands) {
    if (cli.subs[name]->parsed()) sub = name;
  }

  ExperimentReport rep;
  try {
    if (sub == "comply" || sub == "stability") {
      ComplianceConfig cfg = s.compliance;
      cfg.seed = s.seed;
      cfg.probe_grid = linspace(s.probe_lo, s.probe_hi, s.probe_count);
      cfg.validate();
      std::vector<std::string> names = s.operators;
      if (sub == "stability" || names.empty()) names = {"qnorm", "softsort", "sinkhorn"};
      std::vector<OperatorConfig> ops;
      for (const auto& n : names) ops.push_back(make_operator(s, n, 15));
      rep = run_compliance_experiment(sub, ops, cfg);
      for (const auto& [name, d] : rep.details.items()) {
        out << d["summary"].get<std::string>() << '\n';
      }
    } else if (sub == "robustness") {
      RobustnessConfig cfg = s.robustness;
      cfg.train.seed = s.seed;
      cfg.refit_on_shift = !s.frozen_stats;
      cfg.train.validate();
      std::vector<std::string> names = s.operators;
      if (names.empty()) names = {"qnorm", "softsort", "sinkhorn"};
      std::vector<OperatorConfig> ops;
      for (const auto& n : names) ops.push_back(make_operator(s, n, 10));
      rep = run_robustness_experiment(ops, cfg);
      for (const auto& r : rep.rows) {
        if (r.name != "spearman") continue;
        out << r.context.at("operator") << " " << r.context.at("transform") << " spearman="
            << (r.value ? format_number(*r.value) : std::string("null")) << '\n';
      }
    } else if (sub == "tabular") {
      TabularConfig cfg = s.tabular;
      cfg.train.seed = s.seed;
      cfg.op = make_operator(s, "qnorm", 15);
      std::string path = s.csv_path;
      if (!s.emit_synthetic.empty()) {
        write_task_csv(s.emit_synthetic,
                       gen_synthetic_task(s.synthetic_rows, s.synthetic_features, s.seed));
        if (path.empty()) path = s.emit_synthetic;
      }
      if (path.empty()) throw std::invalid_argument("tabular needs --csv or --emit-synthetic");
      std::optional<std::vector<std::string>> cols;
      if (!s.columns.empty()) cols = s.columns;
      const CsvData data = ingest_csv(path, s.target, cols);
      const TabularResult r = run_tabular_protocol(data.x, data.y, cfg);
      rep.subcommand = "tabular";
      rep.config["tabular"] = {{"csv", path},
                               {"target", s.target},
                               {"columns", data.feature_names},
                               {"test_ratio", cfg.test_ratio},
                               {"hidden", cfg.hidden},
                               {"emit_synthetic", s.emit_synthetic},
                               {"synthetic_rows", s.synthetic_rows},
                               {"synthetic_features", s.synthetic_features},
                               {"feature_scaling", "z-score with train-split stats"},
                               {"target_scaling", "z-score with train-split stats"}};
      rep.config["train"] = train_json(cfg.train);
      rep.config["operators"] = nlohmann::json::array({operator_json(cfg.op)});
      rep.add("tabular", "qnorm", "", "train_mse", r.train_mse);
      rep.add("tabular", "qnorm", "", "test_mse", r.test_mse);
      rep.add("tabular", "qnorm", "", "train_spearman", r.train_spearman);
      rep.add("tabular", "qnorm", "", "test_spearman", r.test_spearman);
      rep.verdicts["qnorm"] = {{"metrics_defined", r.test_spearman.has_value()},
                               {"as_expected", r.test_spearman.has_value()}};
      rep.details["split"] = {{"train_rows", r.split.train.size()},
                              {"test_rows", r.split.test.size()}};
      rep.details["epoch_losses"] = r.epoch_losses;
      out << "train_mse=" << format_number(r.train_mse)
          << " test_mse=" << format_number(r.test_mse) << " test_spearman="
          << (r.test_spearman ? format_number(*r.test_spearman) : std::string("null")) << '\n';
    } else if (sub == "controls") {
      ComplianceConfig cfg;
      cfg.seed = s.seed;
      rep = run_controls_experiment(cfg);
      for (const auto& [name, v] : rep.verdicts.items()) {
        out << name << ": " << (v["fired"].get<bool>() ? "fired" : "DID NOT FIRE") << '\n';
      }
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  // Every number above depends only on this echo.
  nlohmann::json common = common_json(s);
  for (auto it = common.begin(); it != common.end(); ++it) rep.config[it.key()] = it.value();

  try {
    const ReportPaths paths = emit_report(rep, s.out_dir);
    out << "wrote " << paths.report.string() << " and " << paths.metrics.string() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return verdicts_as_expected(rep) ? 0 : 1;
}

}  // namespace admnorm
