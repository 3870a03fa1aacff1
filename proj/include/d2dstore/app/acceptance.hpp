#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace d2dstore::app {

struct CriterionResult {
  std::string id;
  std::string name;
  bool pass = false;
  std::string measured;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::filesystem::path golden;
  double horizon = 1e6;  // simulated time per run in the simulation criterion
  std::uint64_t seed = 1;
  std::ostream* progress = nullptr;  // one line per finished criterion
};

// Runs every acceptance criterion in order. Throws GoldenMissing before
// running anything when the golden file is absent.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

// "PASS  3  name  measured  (0.12 s)"
std::string format_result(const CriterionResult& r);

}  // namespace d2dstore::app
