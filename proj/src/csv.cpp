#include "admnorm/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace admnorm {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      current.push_back(c);
    } else if (c == ',' && !quoted) {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

CsvData parse_csv(std::istream& in, std::string_view target_column,
                  const std::optional<std::vector<std::string>>& feature_columns) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw ParseError("empty file: no header row", 0, "");
  if (line_no == 1 && header.front().rfind("\xEF\xBB\xBF", 0) == 0) {
    header.front().erase(0, 3);
  }

  const auto col_index = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto target_idx = col_index(target_column);
  if (!target_idx) {
    throw ParseError("target column '" + std::string(target_column) + "' not in header",
                     line_no, std::string(target_column));
  }

  // raw cells first; numeric classification needs whole columns
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(header.size()),
                       line_no, "");
    }
    rows.push_back(std::move(fields));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw ParseError("no data rows", line_no, "");

  std::vector<std::size_t> feature_idx;
  if (feature_columns) {
    for (const auto& name : *feature_columns) {
      const auto idx = col_index(name);
      if (!idx) throw ParseError("feature column '" + name + "' not in header", 1, name);
      feature_idx.push_back(*idx);
    }
  } else {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == *target_idx) continue;
      const bool any_numeric = std::any_of(rows.begin(), rows.end(), [&](const auto& r) {
        return parse_double(r[c]).has_value();
      });
      if (any_numeric) feature_idx.push_back(c);
    }
  }
  if (feature_idx.empty()) throw ParseError("no numeric feature columns", 1, "");

  const auto cell = [&](std::size_t r, std::size_t c) {
    const auto v = parse_double(rows[r][c]);
    if (!v) {
      throw ParseError("non-numeric cell '" + rows[r][c] + "' at row " +
                           std::to_string(row_lines[r]) + ", column \"" + header[c] + "\"",
                       row_lines[r], header[c]);
    }
    return *v;
  };

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(feature_idx.size()));
  std::vector<double> y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t f = 0; f < feature_idx.size(); ++f) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = cell(r, feature_idx[f]);
    }
    y[r] = cell(r, *target_idx);
  }
  std::vector<std::string> names;
  for (std::size_t c : feature_idx) names.push_back(header[c]);
  return {FeatureMatrix(std::move(x)), std::move(y), std::move(names)};
}

CsvData ingest_csv(const std::filesystem::path& path, std::string_view target_column,
                   const std::optional<std::vector<std::string>>& feature_columns) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0, "");
  return parse_csv(in, target_column, feature_columns);
}

void write_task_csv(std::ostream& out, const TaskData& task) {
  const Eigen::Index d = task.x.cols();
  for (Eigen::Index j = 0; j < d; ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < task.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out << format_number(task.x(i, j)) << ',';
    out << format_number(task.y[static_cast<std::size_t>(i)]) << '\n';
  }
}

void write_task_csv(const std::filesystem::path& path, const TaskData& task) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_task_csv(out, task);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace admnorm
