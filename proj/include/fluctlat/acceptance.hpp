#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fluctlat {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

constexpr int kCriteria = 11;

/// Runs one acceptance criterion (1..11) and prints its pass/fail line.
CriterionResult run_criterion(int id, std::ostream& log, int threads);

/// Runs the given criteria in order; all of them when `ids` is empty.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, std::ostream& log, int threads);

}  // namespace fluctlat
