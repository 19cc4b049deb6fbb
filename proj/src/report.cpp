#include "admnorm/report.hpp"

#include "admnorm/csv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace admnorm {

void ExperimentReport::add(std::string experiment, std::string op, std::string transform,
                           std::string metric, std::optional<double> value) {
  rows.push_back({std::move(metric),
                  value,
                  {{"experiment", std::move(experiment)},
                   {"operator", std::move(op)},
                   {"transform", std::move(transform)}}});
}

nlohmann::json metric_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

namespace {

void dump_into(std::ostringstream& out, const nlohmann::json& v, int depth) {
  const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
  const std::string close_pad(static_cast<std::size_t>(depth) * 2, ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      // std::map-backed objects iterate in key order
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << nlohmann::json(it.key()).dump() << ": ";
        dump_into(out, it.value(), depth + 1);
      }
      out << '\n' << close_pad << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out << ",\n";
        out << pad;
        dump_into(out, v[i], depth + 1);
      }
      out << '\n' << close_pad << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      out << (std::isfinite(d) ? format_number(d) : std::string("null"));
      return;
    }
    default:
      out << v.dump();
      return;
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted.push_back('"');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

std::string tag(const MetricValue& m, const std::string& key) {
  const auto it = m.context.find(key);
  return it == m.context.end() ? std::string() : it->second;
}

}  // namespace

std::string dump_canonical(const nlohmann::json& value) {
  std::ostringstream out;
  dump_into(out, value, 0);
  out << '\n';
  return out.str();
}

std::string render_report(const ExperimentReport& report) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["subcommand"] = report.subcommand;
  doc["config"] = report.config;
  doc["verdicts"] = report.verdicts;
  doc["details"] = report.details;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& m : report.rows) {
    rows.push_back({{"experiment", tag(m, "experiment")},
                    {"operator", tag(m, "operator")},
                    {"transform", tag(m, "transform")},
                    {"metric", m.name},
                    {"value", metric_json(m.value)}});
  }
  doc["metrics"] = std::move(rows);
  return dump_canonical(doc);
}

std::string render_metrics_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "experiment,operator,transform,metric,value\n";
  for (const auto& m : report.rows) {
    out << csv_field(tag(m, "experiment")) << ',' << csv_field(tag(m, "operator")) << ','
        << csv_field(tag(m, "transform")) << ',' << csv_field(m.name) << ','
        << (m.value ? format_number(*m.value) : std::string()) << '\n';
  }
  return out.str();
}

ReportPaths emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "'");

  ReportPaths paths{dir / (report.subcommand + "_report.json"),
                    dir / (report.subcommand + "_metrics.csv")};
  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
  };
  write(paths.report, render_report(report));
  write(paths.metrics, render_metrics_csv(report));
  return paths;
}

}  // namespace admnorm
