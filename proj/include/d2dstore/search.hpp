#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "d2dstore/core_model.hpp"

namespace d2dstore {

struct SearchSpec {
  NetworkParams params;
  Scheme scheme = Scheme::Conventional;
  int m_max = 10;
  double gamma_budget = 3.0;  // storage budget in files: m*alpha <= gamma*F
  std::vector<double> delta_grid;
  bool incoming = false;

  void validate() const;
};

// Every admissible code with m <= m_max within the storage budget, ordered by
// family (Replication, MDS, MSR, MBR, LRC), then m, h, r. MDS starts at h = 2
// since h = 1 is replication.
std::vector<CodeSpec> enumerate_codes(const SearchSpec& spec);

// Overall cost of one code, using the incoming-node model when asked.
CostBreakdown evaluate_cost(const NetworkParams& params, const CodeSpec& code, Scheme scheme,
                            double delta, bool incoming);

struct CurvePoint {
  double delta = 0.0;
  std::size_t index = 0;  // position of the winner in the enumeration
  CodeSpec code;
  CostBreakdown cost;
};

// Cheapest code at every grid point; ties go to the earlier code.
std::vector<CurvePoint> min_cost_curve(const SearchSpec& spec);
std::vector<CurvePoint> min_cost_curve(const SearchSpec& spec, const std::vector<CodeSpec>& codes);

struct DeltaMax {
  enum class Kind { None, Finite, Infinite };
  Kind kind = Kind::None;
  double value = 0.0;  // meaningful for Finite only
};

// Largest repair interval with overall cost below M*omega*rho_bs. The last
// sign change on a log grid over [1e-3, 1e2]/mu is refined by bisection.
DeltaMax delta_max(const NetworkParams& params, const CodeSpec& code, Scheme scheme,
                   bool incoming = false);

// Cost-minimizing repair interval over [0, delta_max] (or the grid end).
// Returns 0 when instantaneous repair is at least as cheap as every
// interior point.
double delta_opt(const NetworkParams& params, const CodeSpec& code, Scheme scheme,
                 bool incoming = false);

struct BestDeltaMax {
  DeltaMax delta_max;
  std::optional<CodeSpec> code;
};

// Code with the largest delta_max over the enumeration.
BestDeltaMax best_delta_max(const SearchSpec& spec);

}  // namespace d2dstore
