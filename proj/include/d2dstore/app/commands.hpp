#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2dstore/app/config.hpp"
#include "d2dstore/app/csv.hpp"

namespace d2dstore::app {

enum ExitCode : int { kOk = 0, kValidationFailed = 1, kConfigError = 2, kGoldenMissing = 3 };

struct Manifest {
  std::string command;  // analytic | simulate | search | figures | validate
  std::filesystem::path config_path;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool force = false;
  std::vector<std::string> overrides;
};

// Runs one command and returns its exit code. Progress goes to out, errors
// to err.
int run_command(const Manifest& manifest, std::ostream& out, std::ostream& err);

// Table builders shared by the commands, the figure datasets and the tests.
Table analytic_table(const Config& cfg);
Table search_table(const Config& cfg, Scheme scheme);

// One simulation per (code, scheme, positive delta), in that order. Seeds are
// cfg.sim.seed + run index.
struct SimRecord {
  nlohmann::ordered_json json;
  std::vector<std::string> report_row;
  bool flagged = false;
};
// With cfg.sim.trace set, run i writes its event trace to trace_dir/trace_<i>.csv.
std::vector<SimRecord> simulate_all(const Config& cfg, const std::filesystem::path& trace_dir = {});
std::vector<std::string> simulation_report_header();

}  // namespace d2dstore::app
