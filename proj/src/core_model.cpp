#include "d2dstore/core_model.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/binomial.hpp>

namespace d2dstore {

namespace {

void require(bool ok, const char* constraint, const std::string& detail) {
  if (!ok) throw ConstraintError(constraint, detail);
}

std::string triple(int m, int h, int r) {
  std::ostringstream os;
  os << "[" << m << "," << h << "," << r << "]";
  return os.str();
}

}  // namespace

void NetworkParams::validate() const {
  require(std::isfinite(M) && M > 0, "M > 0", "M = " + std::to_string(M));
  require(std::isfinite(lambda) && lambda > 0, "lambda > 0", "lambda = " + std::to_string(lambda));
  require(std::isfinite(mu) && mu >= 0, "mu >= 0", "mu = " + std::to_string(mu));
  require(std::isfinite(omega) && omega >= 0, "omega >= 0", "omega = " + std::to_string(omega));
  require(std::isfinite(lambda_c) && lambda_c >= 0, "lambda_c >= 0",
          "lambda_c = " + std::to_string(lambda_c));
  require(lambda_c <= mu, "lambda_c <= mu",
          "lambda_c = " + std::to_string(lambda_c) + ", mu = " + std::to_string(mu));
  require(std::isfinite(rho_bs) && rho_bs > 0, "rho_bs > 0", "rho_bs = " + std::to_string(rho_bs));
  require(std::isfinite(rho_d2d) && rho_d2d > 0, "rho_d2d > 0",
          "rho_d2d = " + std::to_string(rho_d2d));
  require(std::isfinite(F) && F > 0, "F > 0", "F = " + std::to_string(F));
}

std::string_view family_name(CodeFamily f) {
  switch (f) {
    case CodeFamily::Replication: return "Replication";
    case CodeFamily::MDS: return "MDS";
    case CodeFamily::MSR: return "MSR";
    case CodeFamily::MBR: return "MBR";
    case CodeFamily::LRC: return "LRC";
  }
  return "?";
}

CodeFamily parse_family(std::string_view name) {
  for (auto f : {CodeFamily::Replication, CodeFamily::MDS, CodeFamily::MSR, CodeFamily::MBR,
                 CodeFamily::LRC}) {
    if (name == family_name(f)) return f;
  }
  if (name == "REP" || name == "replication") return CodeFamily::Replication;
  throw ConstraintError("known code family", "unknown family '" + std::string(name) + "'");
}

std::string_view scheme_name(Scheme s) {
  return s == Scheme::Hybrid ? "hybrid" : "conventional";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "conventional") return Scheme::Conventional;
  if (name == "hybrid") return Scheme::Hybrid;
  throw ConstraintError("known scheme", "unknown scheme '" + std::string(name) + "'");
}

std::string CodeSpec::label() const {
  return std::string(family_name(family)) + triple(m, h, r);
}

CodeSpec derive_code(CodeFamily family, int m, int h, int r, double F) {
  require(std::isfinite(F) && F > 0, "F > 0", "F = " + std::to_string(F));
  require(m >= 2, "m >= 2", triple(m, h, r));

  CodeSpec c;
  c.family = family;
  c.m = m;
  c.F = F;
  using I = std::int64_t;

  switch (family) {
    case CodeFamily::Replication:
      c.h = c.r = 1;
      c.k = 1;
      c.n = m;
      c.alpha_frac = c.beta_frac = Ratio(1);
      break;
    case CodeFamily::MDS:
      require(h >= 1 && h < m, "1 <= h < m", triple(m, h, r));
      require(r == h, "MDS r = h", triple(m, h, r));
      c.h = c.r = h;
      c.k = h;
      c.n = m;
      c.alpha_frac = c.beta_frac = Ratio(1, h);
      break;
    case CodeFamily::MSR: {
      require(h >= 1 && h < m, "1 <= h < m", triple(m, h, r));
      require(r < m, "r < m", triple(m, h, r));
      require(r >= h, "MSR r >= h", triple(m, h, r));
      require(h <= 2 || r >= 2 * (h - 1), "MSR r >= 2(h-1)", triple(m, h, r));
      c.h = h;
      c.r = r;
      const I sub = r - h + 1;
      c.k = I(h) * sub;
      c.n = I(m) * sub;
      c.alpha_frac = Ratio(1, h);
      c.beta_frac = Ratio(1, I(h) * sub);
      break;
    }
    case CodeFamily::MBR: {
      require(h >= 1 && h < m, "1 <= h < m", triple(m, h, r));
      require(r < m, "r < m", triple(m, h, r));
      require(r >= h, "MBR r >= h", triple(m, h, r));
      c.h = h;
      c.r = r;
      c.k = I(h) * r - I(h) * (h - 1) / 2;
      c.n = I(m) * r;
      const I den = 2 * I(r) - h + 1;
      c.alpha_frac = Ratio(1, h) * Ratio(2 * I(r), den);
      c.beta_frac = Ratio(1, h) * Ratio(2, den);
      break;
    }
    case CodeFamily::LRC:
      require(h >= 1 && h < m, "1 <= h < m", triple(m, h, r));
      require(r >= 1 && r < h, "LRC 1 <= r < h", triple(m, h, r));
      require(m % (r + 1) == 0, "LRC (r+1) | m", triple(m, h, r));
      c.h = h;
      c.r = r;
      c.k = I(r) * h;
      c.n = I(m) * (r + 1);
      c.G = m / (r + 1);
      c.alpha_frac = c.beta_frac = Ratio(1, h) * Ratio(r + 1, r);
      break;
  }
  return c;
}

CostBreakdown make_breakdown(double repair_bs, double repair_d2d, double download_bs,
                             double download_d2d, const NetworkParams& params) {
  CostBreakdown b;
  b.repair_bs = repair_bs;
  b.repair_d2d = repair_d2d;
  b.download_bs = download_bs;
  b.download_d2d = download_d2d;
  b.total = repair_bs + repair_d2d + download_bs + download_d2d;
  const double ref = params.M * params.omega * params.rho_bs;
  if (ref > 0) b.normalized = b.total / ref;
  return b;
}

double poisson_occupancy(int i, double M, double lambda, double mu) {
  if (i < 0) return 0.0;
  boost::math::poisson_distribution<double> d(M * lambda / mu);
  return boost::math::pdf(d, static_cast<double>(i));
}

double binomial_pmf(int i, int m, double p) { return binomial_pmf(i, m, p, 1.0 - p); }

double binomial_pmf(int i, int m, double p, double q) {
  if (m < 0 || i < 0 || i > m) {
    throw std::out_of_range("binomial_pmf: i = " + std::to_string(i) + " outside [0, " +
                            std::to_string(m) + "]");
  }
  const double coef = boost::math::binomial_coefficient<double>(static_cast<unsigned>(m),
                                                                static_cast<unsigned>(i));
  return coef * std::pow(p, i) * std::pow(q, m - i);
}

}  // namespace d2dstore
