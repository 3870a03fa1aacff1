#pragma once

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "d2dstore/core_model.hpp"

namespace d2dstore {

struct CostQuery {
  NetworkParams params;
  CodeSpec code;
  Scheme scheme = Scheme::Conventional;
  double delta = 0.0;
};

// Node survival over one repair interval. q is carried separately from p so
// that short intervals do not lose the loss probability to rounding.
struct Survival {
  double p = 1.0;
  double q = 0.0;

  static Survival over(double rate, double delta);
  static Survival from_loss(double q) { return {1.0 - q, q}; }
};

struct Split {
  double bs = 0.0;
  double d2d = 0.0;
  double total() const { return bs + d2d; }
};

// Conventional repair cost with every lost node replaced from the peers when
// at least r survive, from the BS otherwise. Rejects LRC codes.
double repair_cost(const CostQuery& query);
// Every lost node replaced from the BS.
double repair_cost_bs_only(const CostQuery& query);

// prod_{j=h, j != i}^{m} j / (j - i)
boost::multiprecision::cpp_rational partial_fraction_weight_exact(int i, int h, int m);
double partial_fraction_weight(int i, int h, int m);

// Fraction of time at least h of m storage nodes are alive, averaged over a
// repair interval. Returns 1 for mu == 0 or delta == 0.
double p_d2d(int h, int m, double mu, double delta);
double p_d2d(const NetworkParams& params, const CodeSpec& code, double delta);

double download_cost(const CostQuery& query);

// Instantaneous-repair cost, the delta -> 0 limit.
double limit_cost_zero(const NetworkParams& params, const CodeSpec& code);

// Highest survivor count still repaired (downloaded) entirely from the BS by
// the hybrid scheme. Survivor counts above it and below r (h) use a partial
// transfer. Returns r - 1 (h - 1) when no partial branch exists.
int hybrid_repair_threshold(const NetworkParams& params, const CodeSpec& code);
int hybrid_download_threshold(const NetworkParams& params, const CodeSpec& code);

double hybrid_repair_cost(const CostQuery& query);
double hybrid_download_cost(const CostQuery& query);

// Distribution of the number of live storage nodes seen by a request.
// c[i] for 1 <= i < h (c[0] unused); p_bs covers zero live nodes.
struct AvailabilityPartition {
  double p_bs = 0.0;
  std::vector<double> c;
  double p_d2d = 0.0;
  double sum() const;
};
AvailabilityPartition availability_partition(int h, int m, double mu, double delta);

double lrc_repair_cost(const CostQuery& query);

// Expected numbers of lost LRC nodes per interval repaired inside their
// group, from h nodes of other groups, and from the BS.
struct LrcRepairCounts {
  double local = 0.0;
  double global = 0.0;
  double bs = 0.0;
};
LrcRepairCounts lrc_repair_counts(const CodeSpec& code, Survival s);

// Total cost with the conventional or hybrid scheme. delta == 0 is answered
// by limit_cost_zero. When the BS is cheaper per repaired node
// (rho_bs*gamma_bs < rho_d2d*gamma_d2d) all repairs go to the BS, and when it
// is cheaper per download (rho_bs*F < rho_d2d*h*alpha) all downloads do.
CostBreakdown overall_cost(const CostQuery& query);

// Building blocks shared with the incoming-node scenario. The survival
// probability and the effective departure rate are supplied by the caller.
bool repair_prefers_bs(const NetworkParams& params, const CodeSpec& code);
bool download_prefers_bs(const NetworkParams& params, const CodeSpec& code);
Split repair_split(const NetworkParams& params, const CodeSpec& code, Scheme scheme, double delta,
                   Survival s);
Split download_split(const NetworkParams& params, const CodeSpec& code, Scheme scheme,
                     double delta, double mu);
// The delta -> 0 limit as a breakdown, with the BS preference rules applied
// and the per-node loss rate supplied by the caller.
CostBreakdown limit_breakdown(const NetworkParams& params, const CodeSpec& code,
                              double node_loss_rate);

}  // namespace d2dstore
