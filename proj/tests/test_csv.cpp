#include "admnorm/csv.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace admnorm {
namespace {

CsvData parse(const std::string& text, const std::string& target = "y",
              std::optional<std::vector<std::string>> cols = std::nullopt) {
  std::istringstream in(text);
  return parse_csv(in, target, cols);
}

TEST(Csv, SmallTable) {
  const auto d = parse("x1,x2,y\n1,2,3\n4,5,6\n7,8,9\n");
  EXPECT_EQ(d.x.rows(), 3);
  EXPECT_EQ(d.x.cols(), 2);
  EXPECT_EQ(d.y, (std::vector<double>{3, 6, 9}));
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"x1", "x2"}));
  EXPECT_EQ(d.x(2, 1), 8.0);
}

TEST(Csv, TargetAnywhereAndExplicitColumns) {
  const auto d = parse("y,a,b\n1,2,3\n4,5,6\n", "y", std::vector<std::string>{"b"});
  EXPECT_EQ(d.x.cols(), 1);
  EXPECT_EQ(d.x(1, 0), 6.0);
  EXPECT_EQ(d.y, (std::vector<double>{1, 4}));
}

TEST(Csv, NonNumericCellNamesRowAndColumn) {
  try {
    parse("x1,x2,y\nabc,2,3\n4,5,6\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "x1");
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos);
    EXPECT_NE(msg.find("\"x1\""), std::string::npos);
  }
}

TEST(Csv, IdentifierColumnsAreDropped) {
  const auto d = parse("id,x1,y\nr1,1,2\nr2,3,4\n");
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"x1"}));
}

TEST(Csv, Errors) {
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("x1,y\n"), ParseError);
  EXPECT_THROW(parse("x1,z\n1,2\n"), ParseError);
  EXPECT_THROW(parse("x1,y\n1,2,3\n"), ParseError);
  EXPECT_THROW(parse("x1,y\n1,2\n", "y", std::vector<std::string>{"nope"}), ParseError);
  EXPECT_THROW(ingest_csv("/nonexistent/file.csv", "y"), ParseError);
}

TEST(Csv, BomQuotesCrlfAndBlankLines) {
  const auto d = parse("\xEF\xBB\xBF\"x1\",y\r\n\r\n\"1.5\",2\r\n");
  EXPECT_EQ(d.x(0, 0), 1.5);
  EXPECT_EQ(d.y, std::vector<double>{2.0});
}

TEST(Csv, FormatNumberRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(Csv, SyntheticTaskRoundTripIsBitwise) {
  const TaskData t = gen_synthetic_task(200, 6, 4);
  const auto path = std::filesystem::temp_directory_path() / "admnorm_csv_roundtrip.csv";
  write_task_csv(path, t);
  const CsvData d = ingest_csv(path, "y");
  std::filesystem::remove(path);
  EXPECT_EQ(d.x.data(), t.x.data());
  EXPECT_EQ(d.y, t.y);
  EXPECT_EQ(d.feature_names.front(), "x1");
  EXPECT_EQ(d.feature_names.back(), "x6");
}

}  // namespace
}  // namespace admnorm
