#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace lossmesh {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::size_t threads = 1;
  std::filesystem::path out_dir = "verify_out";  // CSV artifacts (phase convergence curves)
  std::uint64_t seed = 1;
};

inline constexpr int kCriteria = 11;

// Runs one acceptance criterion (1..kCriteria). Exceptions inside a criterion
// are reported as a failure, not propagated.
CriterionResult run_criterion(int id, const VerifyOptions& options);

// Runs the listed criteria (all when empty) in order, reporting each result
// as soon as it is known.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& options, const std::vector<int>& ids = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// One line: "PASS [ 3] name (12.3 s): detail".
std::string format_result(const CriterionResult& r);

}  // namespace lossmesh
