#pragma once

#include <string>
#include <vector>

// Catalog of worked examples, each checked against the library from its raw
// inputs (trace text or schedule), so every expectation is re-derivable.

namespace qqc::fixtures {

struct FixtureResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<std::string> fixture_names();

// Runs every fixture whose name starts with filter ("" = all).
std::vector<FixtureResult> run_fixtures(const std::string& filter);

}  // namespace qqc::fixtures
