#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lossmesh {

// Named real-valued columns, rectangular rows, and '#'-prefixed metadata
// lines written ahead of the CSV header.
struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  ResultTable() = default;
  ResultTable(std::string name, std::vector<std::string> columns);

  // ValidationError unless the row has one value per column.
  void add_row(std::vector<double> row);
  // AlignmentError if the column is missing.
  std::size_t column(std::string_view label) const;
  void set_meta(const std::string& key, const std::string& value);
  const std::string* meta(std::string_view key) const;

  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;
  static ResultTable read_csv(std::istream& in);

  bool operator==(const ResultTable&) const = default;
};

// Shortest text that reads back to the same double.
std::string format_real(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

struct CompareRule {
  std::vector<std::string> keys;  // columns identifying a row in both tables
  std::string model_column;
  std::string estimate_column;
  std::string se_column;  // in the estimate table; empty: no SE allowance
  double abs_tol = 0.0;
  double se_multiplier = 3.0;
};

struct CompareReport {
  ResultTable table;  // keys..., model, estimate, se, delta, threshold, pass
  bool pass = true;
  double worst_delta = 0.0;
};

// Row-wise verdict |model - estimate| <= max(abs_tol, se_multiplier * se).
// AlignmentError if the key sets differ or are empty.
CompareReport compare_report(const ResultTable& model, const ResultTable& estimate, const CompareRule& rule);

}  // namespace lossmesh
