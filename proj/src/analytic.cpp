#include "d2dstore/analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/binomial.hpp>

namespace d2dstore {

using boost::multiprecision::cpp_rational;

namespace {

constexpr int kCachedM = 32;

void require_delta(double delta, const char* who) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::domain_error(std::string(who) + ": delta must be finite and >= 0");
  }
}

void require_not_lrc(const CodeSpec& code, const char* who) {
  if (code.family == CodeFamily::LRC) {
    throw ConstraintError("family != LRC",
                          std::string(who) + " does not apply to LRC codes; use lrc_repair_cost");
  }
}

// Weights for every (h, m) with m <= kCachedM, indexed [m][h][i].
class WeightTable {
 public:
  WeightTable() {
    for (int m = 1; m <= kCachedM; ++m) {
      for (int h = 1; h <= m; ++h) {
        auto& row = w_[m][h];
        row.assign(m + 1, 0.0);
        for (int i = h; i <= m; ++i) {
          row[i] = static_cast<double>(partial_fraction_weight_exact(i, h, m));
        }
      }
    }
  }
  const std::vector<double>& row(int h, int m) const { return w_[m][h]; }

 private:
  std::array<std::array<std::vector<double>, kCachedM + 1>, kCachedM + 1> w_;
};

const WeightTable& weight_table() {
  static const WeightTable table;
  return table;
}

// 1 - (1 - e^-x)/x, by its Taylor series where the closed form cancels.
double mean_loss(double x) {
  if (x > 0.5) return 1.0 + std::expm1(-x) / x;
  double term = x / 2.0, sum = 0.0;
  for (int k = 3; std::abs(term) > 1e-18 * std::abs(sum); ++k) {
    sum += term;
    term *= -x / k;
  }
  return sum;
}

std::vector<double> binomial_row(int m, Survival s) {
  std::vector<double> b(m + 1);
  for (int i = 0; i <= m; ++i) b[i] = binomial_pmf(i, m, s.p, s.q);
  return b;
}

// Conventional repair, summed over survivor counts, before division by F*delta.
Split conventional_repair_sum(const NetworkParams& np, const CodeSpec& c, Survival s) {
  const auto b = binomial_row(c.m, s);
  double lost_bs = 0.0, lost_d2d = 0.0;
  for (int i = 0; i <= c.m; ++i) {
    const double lost = (c.m - i) * b[i];
    (i < c.r ? lost_bs : lost_d2d) += lost;
  }
  return {np.rho_bs * c.gamma_bs() * lost_bs, np.rho_d2d * c.gamma_d2d() * lost_d2d};
}

// Hybrid repair: the conventional sum with every survivor count in (a, r)
// moved from the BS branch to the cheaper partial branch.
Split hybrid_repair_sum(const NetworkParams& np, const CodeSpec& c, Survival s) {
  Split out = conventional_repair_sum(np, c, s);
  if (np.rho_bs <= np.rho_d2d) return out;
  const int a = hybrid_repair_threshold(np, c);
  const double alpha = c.alpha(), beta = c.beta();
  double moved_bs = 0.0, moved_d2d = 0.0;
  for (int i = std::max(a + 1, 0); i < c.r; ++i) {
    const double lost = (c.m - i) * binomial_pmf(i, c.m, s.p, s.q);
    moved_bs += lost * np.rho_bs * (alpha - (c.r - i) * beta);
    moved_d2d += lost * np.rho_d2d * i * beta;
  }
  out.bs = std::max(0.0, out.bs - moved_bs);
  out.d2d += moved_d2d;
  return out;
}

void compositions(int remaining, int bin, std::vector<int>& x,
                  const std::function<void(const std::vector<int>&)>& visit) {
  if (bin + 1 == static_cast<int>(x.size())) {
    x[bin] = remaining;
    visit(x);
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    x[bin] = v;
    compositions(remaining - v, bin + 1, x, visit);
  }
}

}  // namespace

LrcRepairCounts lrc_repair_counts(const CodeSpec& c, Survival s) {
  const int bins = c.r + 2;  // groups with 0..r+1 losses
  std::vector<double> y(bins);
  for (int i = 0; i < bins; ++i) y[i] = binomial_pmf(i, c.r + 1, s.q, s.p);

  LrcRepairCounts out;
  out.local = c.m * std::pow(s.p, c.r) * s.q;
  std::vector<int> x(bins, 0);
  compositions(c.G, 0, x, [&](const std::vector<int>& xs) {
    // multinomial coefficient as a product of binomials
    double pr = 1.0;
    int left = c.G, lost = 0, multi = 0;
    for (int i = 0; i < bins; ++i) {
      pr *= boost::math::binomial_coefficient<double>(left, xs[i]) * std::pow(y[i], xs[i]);
      left -= xs[i];
      lost += i * xs[i];
      if (i >= 2) multi += i * xs[i];
    }
    if (multi == 0) return;
    (lost <= c.m - c.h ? out.global : out.bs) += pr * multi;
  });
  return out;
}

namespace {

Split lrc_repair_sum(const NetworkParams& np, const CodeSpec& c, Survival s) {
  const LrcRepairCounts n = lrc_repair_counts(c, s);
  return {np.rho_bs * c.gamma_bs() * n.bs,
          np.rho_d2d * (c.gamma_d2d() * n.local + c.h * c.alpha() * n.global)};
}

Split scale(Split s, double f) { return {s.bs * f, s.d2d * f}; }

// Download cost per unit request rate, before multiplication by M*omega.
Split conventional_download_unit(const NetworkParams& np, const CodeSpec& c, double pd) {
  return {np.rho_bs * (1.0 - pd), np.rho_d2d * (c.h * c.alpha() / c.F) * pd};
}

Split hybrid_download_unit(const NetworkParams& np, const CodeSpec& c, double mu, double delta) {
  const double pd = p_d2d(c.h, c.m, mu, delta);
  Split out = conventional_download_unit(np, c, pd);
  if (np.rho_bs <= np.rho_d2d || c.h < 2) return out;
  const int a = hybrid_download_threshold(np, c);
  const auto part = availability_partition(c.h, c.m, mu, delta);
  const double af = c.alpha() / c.F;
  double moved_bs = 0.0, moved_d2d = 0.0;
  for (int i = std::max(a + 1, 1); i < c.h; ++i) {
    moved_bs += part.c[i] * np.rho_bs * (1.0 - (c.h - i) * af);
    moved_d2d += part.c[i] * np.rho_d2d * i * af;
  }
  out.bs = std::max(0.0, out.bs - moved_bs);
  out.d2d += moved_d2d;
  return out;
}

}  // namespace

Survival Survival::over(double rate, double delta) {
  const double x = rate * delta;
  return {std::exp(-x), -std::expm1(-x)};
}

cpp_rational partial_fraction_weight_exact(int i, int h, int m) {
  if (h < 1 || i < h || i > m) {
    throw std::out_of_range("partial_fraction_weight: need 1 <= h <= i <= m");
  }
  cpp_rational w = 1;
  for (int j = h; j <= m; ++j) {
    if (j == i) continue;
    w *= j;
    w /= j - i;
  }
  return w;
}

double partial_fraction_weight(int i, int h, int m) {
  if (m <= kCachedM && h >= 1 && h <= i && i <= m) return weight_table().row(h, m)[i];
  return static_cast<double>(partial_fraction_weight_exact(i, h, m));
}

double p_d2d(int h, int m, double mu, double delta) {
  if (h < 1 || h > m) throw std::out_of_range("p_d2d: need 1 <= h <= m");
  require_delta(delta, "p_d2d");
  if (mu == 0.0 || delta == 0.0) return 1.0;
  // The weights sum to one, so the loss 1 - p_d2d is the weighted sum of
  // 1 - (1 - e^-x)/x. Summing the loss keeps short intervals accurate.
  double loss = 0.0;
  for (int i = h; i <= m; ++i) loss += partial_fraction_weight(i, h, m) * mean_loss(i * mu * delta);
  return std::clamp(1.0 - loss, 0.0, 1.0);
}

double p_d2d(const NetworkParams& params, const CodeSpec& code, double delta) {
  return p_d2d(code.h, code.m, params.mu, delta);
}

bool repair_prefers_bs(const NetworkParams& np, const CodeSpec& c) {
  return np.rho_bs * c.gamma_bs() < np.rho_d2d * c.gamma_d2d();
}

bool download_prefers_bs(const NetworkParams& np, const CodeSpec& c) {
  return np.rho_bs * c.F < np.rho_d2d * c.h * c.alpha();
}

int hybrid_repair_threshold(const NetworkParams& np, const CodeSpec& c) {
  if (np.rho_bs <= np.rho_d2d) return c.r - 1;
  const double gap = to_double(Ratio(c.r) - c.alpha_frac / c.beta_frac);
  const double t = np.rho_bs / (np.rho_bs - np.rho_d2d) * gap;
  return static_cast<int>(std::min<double>(std::floor(t), c.r - 1));
}

int hybrid_download_threshold(const NetworkParams& np, const CodeSpec& c) {
  if (np.rho_bs <= np.rho_d2d) return c.h - 1;
  const double gap = to_double(Ratio(c.h) - Ratio(1) / c.alpha_frac);
  const double t = np.rho_bs / (np.rho_bs - np.rho_d2d) * gap;
  return static_cast<int>(std::min<double>(std::floor(t), c.h - 1));
}

double AvailabilityPartition::sum() const {
  double s = p_bs + p_d2d;
  for (std::size_t i = 1; i < c.size(); ++i) s += c[i];
  return s;
}

AvailabilityPartition availability_partition(int h, int m, double mu, double delta) {
  AvailabilityPartition out;
  std::vector<double> P(h + 1);
  for (int j = 1; j <= h; ++j) P[j] = p_d2d(j, m, mu, delta);
  out.p_bs = std::max(0.0, 1.0 - P[1]);
  out.c.assign(h, 0.0);
  for (int i = 1; i < h; ++i) out.c[i] = std::max(0.0, P[i] - P[i + 1]);
  out.p_d2d = P[h];
  return out;
}

double repair_cost(const CostQuery& q) {
  require_not_lrc(q.code, "repair_cost");
  require_delta(q.delta, "repair_cost");
  const auto& np = q.params;
  if (q.delta == 0.0) return np.rho_d2d * q.code.gamma_d2d() * q.code.m * np.mu / q.code.F;
  const auto s = conventional_repair_sum(np, q.code, Survival::over(np.mu, q.delta));
  return s.total() / (q.code.F * q.delta);
}

double repair_cost_bs_only(const CostQuery& q) {
  require_delta(q.delta, "repair_cost_bs_only");
  const auto& np = q.params;
  const auto& c = q.code;
  if (q.delta == 0.0) return np.rho_bs * c.gamma_bs() * c.m * np.mu / c.F;
  return np.rho_bs * c.gamma_bs() * c.m * Survival::over(np.mu, q.delta).q / (c.F * q.delta);
}

double download_cost(const CostQuery& q) {
  require_delta(q.delta, "download_cost");
  const auto& np = q.params;
  const double pd = p_d2d(q.code.h, q.code.m, np.mu, q.delta);
  return np.M * np.omega * conventional_download_unit(np, q.code, pd).total();
}

double limit_cost_zero(const NetworkParams& np, const CodeSpec& c) {
  return np.rho_d2d / c.F * (c.gamma_d2d() * c.m * np.mu + np.M * np.omega * c.h * c.alpha());
}

double hybrid_repair_cost(const CostQuery& q) {
  require_not_lrc(q.code, "hybrid_repair_cost");
  require_delta(q.delta, "hybrid_repair_cost");
  if (q.delta == 0.0) return repair_cost(q);
  const auto s = hybrid_repair_sum(q.params, q.code, Survival::over(q.params.mu, q.delta));
  return s.total() / (q.code.F * q.delta);
}

double hybrid_download_cost(const CostQuery& q) {
  require_delta(q.delta, "hybrid_download_cost");
  const auto& np = q.params;
  return np.M * np.omega * hybrid_download_unit(np, q.code, np.mu, q.delta).total();
}

double lrc_repair_cost(const CostQuery& q) {
  if (q.code.family != CodeFamily::LRC) {
    throw ConstraintError("family == LRC", "lrc_repair_cost needs an LRC code");
  }
  require_delta(q.delta, "lrc_repair_cost");
  const auto& np = q.params;
  if (q.delta == 0.0) return np.rho_d2d * q.code.gamma_d2d() * q.code.m * np.mu / q.code.F;
  const auto s = lrc_repair_sum(np, q.code, Survival::over(np.mu, q.delta));
  return s.total() / (q.code.F * q.delta);
}

Split repair_split(const NetworkParams& np, const CodeSpec& c, Scheme scheme, double delta,
                   Survival s) {
  if (!(delta > 0.0)) throw std::domain_error("repair_split: delta must be > 0");
  const double norm = 1.0 / (c.F * delta);
  if (repair_prefers_bs(np, c)) {
    return {np.rho_bs * c.gamma_bs() * c.m * s.q * norm, 0.0};
  }
  if (c.family == CodeFamily::LRC) return scale(lrc_repair_sum(np, c, s), norm);
  if (scheme == Scheme::Hybrid) return scale(hybrid_repair_sum(np, c, s), norm);
  return scale(conventional_repair_sum(np, c, s), norm);
}

Split download_split(const NetworkParams& np, const CodeSpec& c, Scheme scheme, double delta,
                     double mu) {
  if (!(delta > 0.0)) throw std::domain_error("download_split: delta must be > 0");
  const double rate = np.M * np.omega;
  if (rate == 0.0) return {};
  if (download_prefers_bs(np, c)) return {rate * np.rho_bs, 0.0};
  if (scheme == Scheme::Hybrid) return scale(hybrid_download_unit(np, c, mu, delta), rate);
  return scale(conventional_download_unit(np, c, p_d2d(c.h, c.m, mu, delta)), rate);
}

CostBreakdown limit_breakdown(const NetworkParams& np, const CodeSpec& c, double node_loss_rate) {
  double rbs = 0.0, rd2d = 0.0, dbs = 0.0, dd2d = 0.0;
  if (repair_prefers_bs(np, c)) {
    rbs = np.rho_bs * c.gamma_bs() * c.m * node_loss_rate / c.F;
  } else {
    rd2d = np.rho_d2d * c.gamma_d2d() * c.m * node_loss_rate / c.F;
  }
  const double rate = np.M * np.omega;
  if (download_prefers_bs(np, c)) {
    dbs = rate * np.rho_bs;
  } else {
    dd2d = rate * np.rho_d2d * c.h * c.alpha() / c.F;
  }
  return make_breakdown(rbs, rd2d, dbs, dd2d, np);
}

CostBreakdown overall_cost(const CostQuery& q) {
  q.params.validate();
  require_delta(q.delta, "overall_cost");
  const auto& np = q.params;
  if (q.delta == 0.0) return limit_breakdown(np, q.code, np.mu);
  const Split r = repair_split(np, q.code, q.scheme, q.delta, Survival::over(np.mu, q.delta));
  const Split d = download_split(np, q.code, q.scheme, q.delta, np.mu);
  return make_breakdown(r.bs, r.d2d, d.bs, d.d2d, np);
}

}  // namespace d2dstore
