#pragma once

#include "admnorm/learner.hpp"
#include "admnorm/rank_core.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace admnorm {

/// CSV problem with its location. Rows are 1-based file lines (the header is row 1).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::string column)
      : std::runtime_error(what), row_(row), column_(std::move(column)) {}

  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

struct CsvData {
  FeatureMatrix x;
  std::vector<double> y;
  std::vector<std::string> feature_names;
};

/// 17-significant-digit text; reads back as the same double.
std::string format_number(double v);

/// Parses a header + numeric rows table. Without an explicit column list every
/// non-target column is a feature, except columns in which no cell is numeric
/// (identifier columns), which are dropped.
CsvData parse_csv(std::istream& in, std::string_view target_column,
                  const std::optional<std::vector<std::string>>& feature_columns = std::nullopt);

CsvData ingest_csv(const std::filesystem::path& path, std::string_view target_column,
                   const std::optional<std::vector<std::string>>& feature_columns = std::nullopt);

/// Writes x1..xd,y with 17-significant-digit numbers.
void write_task_csv(std::ostream& out, const TaskData& task);
void write_task_csv(const std::filesystem::path& path, const TaskData& task);

}  // namespace admnorm
