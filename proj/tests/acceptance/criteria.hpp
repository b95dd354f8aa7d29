#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kinmax::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

int criterion_count();

/// Runs the selected criteria (all when empty), printing one
/// "PASS|FAIL <id> <title>: <detail>" line each to out as it finishes.
std::vector<CriterionResult> run_criteria(std::ostream& out, const std::vector<int>& only = {});

}  // namespace kinmax::acceptance
