#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <ostream>
#include <string_view>

#include "d2dstore/core_model.hpp"

namespace d2dstore {

enum class RequestModel {
  FixedAggregate,          // requests arrive at rate M*omega
  PopulationProportional,  // rate omega times the current population
};

// Which storage nodes a requester can reach in the incoming-node mode.
enum class Visibility {
  ListRefresh,  // nodes on the list broadcast at the last repair epoch
  Oracle,       // every node currently in the cell
};

std::string_view request_model_name(RequestModel m);
RequestModel parse_request_model(std::string_view name);
std::string_view visibility_name(Visibility v);
Visibility parse_visibility(std::string_view name);

struct SimConfig {
  NetworkParams params;
  CodeSpec code;
  Scheme scheme = Scheme::Conventional;
  double delta = 1.0;
  double horizon = 1e5;
  std::uint64_t seed = 1;
  RequestModel request_model = RequestModel::FixedAggregate;
  bool incoming = false;
  Visibility visibility = Visibility::ListRefresh;
  // A requester that is itself a storage node cannot use its own symbol.
  bool exclude_requester = false;
  int warmup_intervals = 10;
  int batches = 50;
  // Optional per-event CSV trace.
  std::ostream* trace = nullptr;

  // Throws ConstraintError when the run cannot produce at least 30 batches
  // of whole repair intervals.
  void validate() const;
};

struct BranchCounts {
  std::uint64_t repair_local = 0;
  std::uint64_t repair_global = 0;
  std::uint64_t repair_d2d = 0;
  std::uint64_t repair_partial = 0;
  std::uint64_t repair_bs = 0;
  std::uint64_t download_d2d = 0;
  std::uint64_t download_partial = 0;
  std::uint64_t download_bs = 0;

  std::uint64_t repairs() const {
    return repair_local + repair_global + repair_d2d + repair_partial + repair_bs;
  }
  std::uint64_t downloads() const { return download_d2d + download_partial + download_bs; }
};

struct SimResult {
  CostBreakdown cost;
  // Batch-means standard errors of the matching cost fields.
  CostBreakdown stderr_cost;
  BranchCounts counts;
  // Repair epochs with lost nodes that were not executed because the cell
  // held fewer than m nodes or too few nodes without a symbol.
  std::uint64_t skipped_repairs = 0;
  std::uint64_t repair_epochs = 0;
  // Fraction of requests that saw at least h reachable storage nodes.
  double d2d_available = 0.0;
  double d2d_available_stderr = 0.0;
  // Time-averaged cell population; only tracked with the population-
  // proportional request model.
  std::optional<double> mean_population;
  int batches = 0;
  double measured_time = 0.0;
  std::uint64_t events = 0;
};

// Cost of one transfer decision, in c.u. (bits times per-bit cost).
struct CostIncrement {
  double bs = 0.0;
  double d2d = 0.0;
};

// Repairs every storage node (class) whose entry in present is zero and
// returns the cost, adding the branch taken per repaired node to counts.
CostIncrement repair_epoch(std::span<const std::uint8_t> present, const NetworkParams& params,
                           const CodeSpec& code, Scheme scheme, BranchCounts& counts);

// Serves one request that can reach `available` storage nodes.
CostIncrement request_event(int available, const NetworkParams& params, const CodeSpec& code,
                            Scheme scheme, BranchCounts& counts);

SimResult run(const SimConfig& config);

}  // namespace d2dstore
