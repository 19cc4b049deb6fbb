#pragma once

#include "admnorm/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace admnorm {

inline constexpr const char* kReportSchemaVersion = "1.0";

/// Everything one CLI run produced.
///
/// `rows` carry the context tags "experiment", "operator" and "transform"; they
/// become the flat metrics CSV. The structured report holds the same rows plus
/// the config echo, verdicts and free-form details.
struct ExperimentReport {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  std::vector<MetricValue> rows;
  nlohmann::json verdicts = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();

  void add(std::string experiment, std::string op, std::string transform, std::string metric,
           std::optional<double> value);
};

/// JSON value for an optional metric (null when undefined).
nlohmann::json metric_json(const std::optional<double>& v);

/// Key-sorted, 2-space indented JSON with doubles at 17 significant digits.
std::string dump_canonical(const nlohmann::json& value);

std::string render_report(const ExperimentReport& report);

/// experiment,operator,transform,metric,value; undefined values are empty fields.
std::string render_metrics_csv(const ExperimentReport& report);

struct ReportPaths {
  std::filesystem::path report;
  std::filesystem::path metrics;
};

/// Writes <dir>/<subcommand>_report.json and <dir>/<subcommand>_metrics.csv.
/// Throws std::runtime_error when the directory or files cannot be written.
ReportPaths emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace admnorm
