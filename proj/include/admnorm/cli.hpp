#pragma once

#include "admnorm/compliance.hpp"
#include "admnorm/learner.hpp"
#include "admnorm/report.hpp"

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace admnorm {

/// Exit codes: 0 success (including recorded inadmissible verdicts for
/// baselines), 1 verdicts not as expected or output failure, 2 usage/parse error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Long option names (without dashes) accepted by a subcommand.
std::vector<std::string> cli_option_names(std::string_view subcommand);

/// Audit of each operator: C1/C2/C3 (+ the rank-space Lipschitz bound for qnorm) with verdicts.
/// QNorm is expected admissible, the batch operators inadmissible; the report
/// records whether each outcome matched.
ExperimentReport run_compliance_experiment(std::string subcommand,
                                           const std::vector<OperatorConfig>& ops,
                                           const ComplianceConfig& cfg);

/// Counterexample operators; verdicts record whether each control fired.
ExperimentReport run_controls_experiment(const ComplianceConfig& cfg);

/// Model-level shift robustness for each operator front-end.
ExperimentReport run_robustness_experiment(const std::vector<OperatorConfig>& ops,
                                           const RobustnessConfig& cfg);

/// True when every verdict in the report matched its expectation.
bool verdicts_as_expected(const ExperimentReport& report);

}  // namespace admnorm
