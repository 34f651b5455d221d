#include "lossmesh/result_table.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "lossmesh/errors.hpp"

namespace lossmesh {
namespace {

ResultTable model_table() {
  ResultTable t("model", {"n", "value"});
  t.add_row({0, 0.5});
  t.add_row({1, 0.3});
  t.add_row({2, 0.2});
  return t;
}

ResultTable estimate_table(double shift_row1) {
  ResultTable t("estimate", {"n", "value", "se"});
  t.add_row({0, 0.5, 0.01});
  t.add_row({1, 0.3 + shift_row1, 0.01});
  t.add_row({2, 0.2, 0.01});
  return t;
}

TEST(ResultTable, RectangularRows) {
  ResultTable t("t", {"a", "b"});
  EXPECT_THROW(t.add_row({1.0}), ValidationError);
  EXPECT_THROW((void)t.column("c"), AlignmentError);
}

TEST(ResultTable, CsvRoundTripIsExact) {
  ResultTable t("t", {"x", "y"});
  t.add_row({0.1, 1.0 / 3.0});
  t.add_row({1e-300, -2.5e17});
  t.add_row({HUGE_VAL, 0.0});
  t.set_meta("seed", "7");
  std::stringstream ss;
  t.write_csv(ss);
  EXPECT_EQ(ss.str().substr(0, 12), "# table: t\n#");
  const ResultTable back = ResultTable::read_csv(ss);
  EXPECT_EQ(back, t);
}

TEST(ResultTable, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}

TEST(CompareReport, IdenticalTablesPass) {
  const auto r = compare_report(model_table(), estimate_table(0.0), {{"n"}, "value", "value", "se", 0.0, 3.0});
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.table.rows.size(), 3u);
}

TEST(CompareReport, FourSigmaRowFails) {
  const auto r = compare_report(model_table(), estimate_table(0.04), {{"n"}, "value", "value", "se", 0.0, 3.0});
  EXPECT_FALSE(r.pass);
  const std::size_t pass_col = r.table.column("pass");
  EXPECT_EQ(r.table.rows[0][pass_col], 1.0);
  EXPECT_EQ(r.table.rows[1][pass_col], 0.0);
  EXPECT_EQ(r.table.rows[2][pass_col], 1.0);
  EXPECT_TRUE(compare_report(model_table(), estimate_table(0.04), {{"n"}, "value", "value", "se", 0.05, 3.0}).pass);
}

TEST(CompareReport, KeyMismatch) {
  ResultTable other("estimate", {"n", "value", "se"});
  other.add_row({7, 0.5, 0.01});
  EXPECT_THROW(compare_report(model_table(), other, {{"n"}, "value", "value", "se", 0.0, 3.0}), AlignmentError);
  ResultTable missing = estimate_table(0.0);
  missing.rows.pop_back();
  EXPECT_THROW(compare_report(model_table(), missing, {{"n"}, "value", "value", "se", 0.0, 3.0}), AlignmentError);
  EXPECT_THROW(compare_report(model_table(), estimate_table(0.0), {{}, "value", "value", "se", 0.0, 3.0}),
               AlignmentError);
}

}  // namespace
}  // namespace lossmesh
