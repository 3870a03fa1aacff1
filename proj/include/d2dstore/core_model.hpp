#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace d2dstore {

// Exact ratio of a bandwidth to the file size F.
using Ratio = boost::rational<std::int64_t>;

inline double to_double(const Ratio& r) { return boost::rational_cast<double>(r); }

// Raised when a parameter combination violates a model or code constraint.
// constraint() names the violated rule so callers can report it verbatim.
class ConstraintError : public std::invalid_argument {
 public:
  ConstraintError(std::string constraint, const std::string& detail)
      : std::invalid_argument(constraint + ": " + detail), constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

struct NetworkParams {
  double M = 30.0;        // expected node count
  double lambda = 1.0;    // per-capita arrival factor, 1/t.u.
  double mu = 1.0;        // per-node departure rate, 1/t.u.
  double omega = 0.02;    // per-node request rate, 1/t.u.
  double lambda_c = 0.0;  // per-class content-node arrival rate, 1/t.u.
  double rho_bs = 40.0;   // BS cost, c.u./bit
  double rho_d2d = 1.0;   // D2D cost, c.u./bit
  double F = 1.0;         // file size, bits

  double rho() const { return rho_bs / rho_d2d; }
  // Throws ConstraintError on the first violated invariant.
  void validate() const;
};

enum class CodeFamily { Replication, MDS, MSR, MBR, LRC };

std::string_view family_name(CodeFamily f);
CodeFamily parse_family(std::string_view name);

struct CodeSpec {
  CodeFamily family = CodeFamily::MDS;
  int m = 0;
  int h = 0;
  int r = 0;
  std::int64_t n = 0;
  std::int64_t k = 0;
  int G = 1;
  double F = 1.0;
  Ratio alpha_frac{0};  // alpha / F
  Ratio beta_frac{0};   // beta / F

  double alpha() const { return F * to_double(alpha_frac); }
  double beta() const { return F * to_double(beta_frac); }
  double gamma_bs() const { return alpha(); }
  double gamma_d2d() const { return F * to_double(gamma_d2d_frac()); }
  Ratio gamma_d2d_frac() const { return beta_frac * static_cast<std::int64_t>(r); }
  // m * alpha / F, the storage footprint in files.
  Ratio storage_frac() const { return alpha_frac * static_cast<std::int64_t>(m); }
  // e.g. "MDS[9,3,3]"
  std::string label() const;
};

CodeSpec derive_code(CodeFamily family, int m, int h, int r, double F = 1.0);
inline CodeSpec replication(int m, double F = 1.0) {
  return derive_code(CodeFamily::Replication, m, 1, 1, F);
}

enum class Scheme { Conventional, Hybrid };

std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

// Costs in c.u. per bit per t.u. normalized is NaN when omega == 0.
struct CostBreakdown {
  double repair_bs = 0.0;
  double repair_d2d = 0.0;
  double download_bs = 0.0;
  double download_d2d = 0.0;
  double total = 0.0;
  double normalized = std::numeric_limits<double>::quiet_NaN();

  double repair() const { return repair_bs + repair_d2d; }
  double download() const { return download_bs + download_d2d; }
};

// Fills total and normalized. The reference cost is M*omega*rho_bs, the
// cost of serving every request from the base station.
CostBreakdown make_breakdown(double repair_bs, double repair_d2d, double download_bs,
                             double download_d2d, const NetworkParams& params);

// Stationary M/M/inf occupancy: Poisson with mean M*lambda/mu.
double poisson_occupancy(int i, double M, double lambda, double mu);

// b_i(m, p). Throws std::out_of_range for i outside [0, m].
double binomial_pmf(int i, int m, double p);
// Same mass with the complement q = 1 - p supplied separately, so that small
// loss probabilities keep full relative precision.
double binomial_pmf(int i, int m, double p, double q);

}  // namespace d2dstore
