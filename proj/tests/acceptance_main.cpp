// Acceptance suite: one pass/fail line per criterion, exit status 0 iff all pass.
#include <iostream>

#include "CLI11.hpp"
#include "fluctlat/acceptance.hpp"
#include "fluctlat/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fluctlat acceptance suite"};
  std::vector<int> ids;
  app.add_option("--criterion", ids, "criterion ids to run (default: all)")->check(CLI::Range(1, fluctlat::kCriteria));
  CLI11_PARSE(app, argc, argv);
  const auto results = fluctlat::run_acceptance(ids, std::cout, fluctlat::default_threads());
  int failed = 0;
  for (const auto& r : results) failed += !r.passed;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
