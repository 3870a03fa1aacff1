#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2dstore/core_model.hpp"
#include "d2dstore/simulator.hpp"

namespace d2dstore::app {

// Malformed or invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimSettings {
  double horizon = 1e6;
  std::uint64_t seed = 1;
  RequestModel request_model = RequestModel::FixedAggregate;
  Visibility visibility = Visibility::ListRefresh;
  bool exclude_requester = false;
  int warmup_intervals = 10;
  int batches = 50;
  bool trace = false;
};

struct SearchSettings {
  int m_max = 10;
  double gamma_budget = 3.0;
};

struct Config {
  NetworkParams network;
  std::vector<CodeSpec> codes;
  std::vector<Scheme> schemes{Scheme::Conventional};
  std::vector<double> grid;
  // Use the incoming-node model in analytic, simulate and search.
  bool incoming = false;
  SimSettings sim;
  SearchSettings search;
  std::filesystem::path golden;
};

// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON when
// possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

Config parse_config(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

// Delta grid from {"delta": [...]}, {"linspace": [a, b, n]} or
// {"logspace": [a, b, n], "include_zero": true}.
std::vector<double> parse_grid(const nlohmann::json& grid);

}  // namespace d2dstore::app
