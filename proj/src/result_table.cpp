#include "lossmesh/result_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lossmesh/errors.hpp"

namespace lossmesh {

ResultTable::ResultTable(std::string name, std::vector<std::string> columns)
    : name(std::move(name)), columns(std::move(columns)) {}

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw ValidationError(name, "row has " + std::to_string(row.size()) + " values for " +
                                    std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column(std::string_view label) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == label) return i;
  }
  throw AlignmentError("table '" + name + "' has no column '" + std::string(label) + "'");
}

void ResultTable::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = value;
      return;
    }
  }
  metadata.emplace_back(key, value);
}

const std::string* ResultTable::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void ResultTable::write_csv(std::ostream& out) const {
  if (!name.empty()) out << "# table: " << name << '\n';
  for (const auto& [k, v] : metadata) out << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_real(row[i]);
    out << '\n';
  }
}

void ResultTable::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_csv(out);
  if (!out) throw Error("failed writing " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

double parse_real(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValidationError("csv", "bad number '" + s + "'");
  return v;
}

}  // namespace

ResultTable ResultTable::read_csv(std::istream& in) {
  ResultTable t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2), value = line.substr(colon + 2);
      if (key == "table") {
        t.name = value;
      } else {
        t.metadata.emplace_back(key, value);
      }
      continue;
    }
    if (!header) {
      t.columns = split(line);
      header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(parse_real(cell));
    t.add_row(std::move(row));
  }
  return t;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

CompareReport compare_report(const ResultTable& model, const ResultTable& estimate, const CompareRule& rule) {
  if (rule.keys.empty()) throw AlignmentError("compare_report needs at least one key column");
  auto index = [&](const ResultTable& t) {
    std::vector<std::size_t> cols;
    for (const auto& k : rule.keys) cols.push_back(t.column(k));
    std::map<std::vector<double>, std::size_t> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      std::vector<double> key;
      for (std::size_t c : cols) key.push_back(t.rows[r][c]);
      if (!rows.emplace(std::move(key), r).second) throw AlignmentError("duplicate key in table '" + t.name + "'");
    }
    return rows;
  };
  const auto model_rows = index(model);
  const auto estimate_rows = index(estimate);
  if (model_rows.empty() || estimate_rows.empty()) throw AlignmentError("no rows to compare");
  for (const auto& [key, r] : model_rows) {
    if (!estimate_rows.count(key)) throw AlignmentError("key present in model but not in estimate");
  }
  for (const auto& [key, r] : estimate_rows) {
    if (!model_rows.count(key)) throw AlignmentError("key present in estimate but not in model");
  }

  const std::size_t mc = model.column(rule.model_column);
  const std::size_t ec = estimate.column(rule.estimate_column);
  const bool has_se = !rule.se_column.empty();
  const std::size_t sc = has_se ? estimate.column(rule.se_column) : 0;

  CompareReport report;
  std::vector<std::string> cols = rule.keys;
  for (const char* c : {"model", "estimate", "se", "delta", "threshold", "pass"}) cols.emplace_back(c);
  report.table = ResultTable("compare", cols);
  for (const auto& [key, mr] : model_rows) {
    const auto& erow = estimate.rows[estimate_rows.at(key)];
    const double m = model.rows[mr][mc];
    const double e = erow[ec];
    const double se = has_se ? erow[sc] : 0.0;
    const double delta = std::abs(m - e);
    const double threshold = std::max(rule.abs_tol, rule.se_multiplier * se);
    const bool ok = delta <= threshold;
    report.pass = report.pass && ok;
    report.worst_delta = std::max(report.worst_delta, delta);
    std::vector<double> row = key;
    for (double v : {m, e, se, delta, threshold, ok ? 1.0 : 0.0}) row.push_back(v);
    report.table.add_row(std::move(row));
  }
  return report;
}

}  // namespace lossmesh
