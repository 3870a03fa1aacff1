#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace d2dstore::app {

// The golden file does not exist; maps to exit code 3.
class GoldenMissing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws GoldenMissing when absent and std::runtime_error when unreadable.
nlohmann::json load_goldens(const std::filesystem::path& path);

struct GoldenCheck {
  std::string name;
  double computed = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Recomputes every frozen reference value with the library and compares it
// within three standard errors (exact for counts). Entries missing from the
// file or malformed are reported as failures.
std::vector<GoldenCheck> check_goldens(const nlohmann::json& goldens);

}  // namespace d2dstore::app
