#include "d2dstore/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "d2dstore/analytic.hpp"
#include "d2dstore/incoming.hpp"

namespace d2dstore {

namespace {

constexpr int kGridPoints = 241;
constexpr double kGridLo = 1e-3;
constexpr double kGridHi = 1e2;
constexpr double kFar = 1e6;

bool within_budget(const CodeSpec& c, double gamma) {
  const Ratio s = c.storage_frac();
  return static_cast<double>(s.numerator()) <= gamma * static_cast<double>(s.denominator());
}

void try_add(std::vector<CodeSpec>& out, CodeFamily f, int m, int h, int r, const SearchSpec& spec) {
  try {
    CodeSpec c = derive_code(f, m, h, r, spec.params.F);
    if (within_budget(c, spec.gamma_budget)) out.push_back(c);
  } catch (const ConstraintError&) {
  }
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  return g;
}

double scale_of(const NetworkParams& np) { return np.mu > 0 ? 1.0 / np.mu : 1.0; }

}  // namespace

void SearchSpec::validate() const {
  params.validate();
  if (m_max < 2) throw ConstraintError("m_max >= 2", std::to_string(m_max));
  if (!(gamma_budget > 1.0)) throw ConstraintError("gamma > 1", std::to_string(gamma_budget));
  if (delta_grid.empty()) throw ConstraintError("non-empty delta grid", "grid is empty");
  if (delta_grid.front() != 0.0) throw ConstraintError("delta grid includes 0", "first point != 0");
  for (std::size_t i = 1; i < delta_grid.size(); ++i) {
    if (!(delta_grid[i] > delta_grid[i - 1])) {
      throw ConstraintError("delta grid strictly increasing", "at index " + std::to_string(i));
    }
  }
}

std::vector<CodeSpec> enumerate_codes(const SearchSpec& spec) {
  std::vector<CodeSpec> out;
  for (int m = 2; m <= spec.m_max; ++m) try_add(out, CodeFamily::Replication, m, 1, 1, spec);
  for (int m = 3; m <= spec.m_max; ++m) {
    for (int h = 2; h < m; ++h) try_add(out, CodeFamily::MDS, m, h, h, spec);
  }
  for (auto f : {CodeFamily::MSR, CodeFamily::MBR}) {
    for (int m = 2; m <= spec.m_max; ++m) {
      for (int h = 1; h < m; ++h) {
        for (int r = h; r < m; ++r) try_add(out, f, m, h, r, spec);
      }
    }
  }
  for (int m = 3; m <= spec.m_max; ++m) {
    for (int h = 2; h < m; ++h) {
      for (int r = 1; r < h; ++r) try_add(out, CodeFamily::LRC, m, h, r, spec);
    }
  }
  return out;
}

CostBreakdown evaluate_cost(const NetworkParams& params, const CodeSpec& code, Scheme scheme,
                            double delta, bool incoming) {
  CostQuery q{params, code, scheme, delta};
  return incoming ? incoming_overall_cost(q) : overall_cost(q);
}

std::vector<CurvePoint> min_cost_curve(const SearchSpec& spec) {
  return min_cost_curve(spec, enumerate_codes(spec));
}

std::vector<CurvePoint> min_cost_curve(const SearchSpec& spec, const std::vector<CodeSpec>& codes) {
  spec.validate();
  if (codes.empty()) throw std::invalid_argument("min_cost_curve: no admissible codes");
  std::vector<CurvePoint> out;
  out.reserve(spec.delta_grid.size());
  for (double delta : spec.delta_grid) {
    std::optional<StationaryDist> dist;
    if (spec.incoming && delta > 0 && spec.params.mu > 0) {
      ChainConfig cfg;
      cfg.lambda_c = spec.params.lambda_c;
      cfg.mu = spec.params.mu;
      cfg.delta = delta;
      dist = stationary(cfg);
    }
    CurvePoint best;
    best.delta = delta;
    bool have = false;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const CostQuery q{spec.params, codes[i], spec.scheme, delta};
      const CostBreakdown c = dist ? incoming_overall_cost(q, *dist)
                                   : evaluate_cost(spec.params, codes[i], spec.scheme, delta,
                                                   spec.incoming);
      if (!have || c.total < best.cost.total) {
        best.index = i;
        best.code = codes[i];
        best.cost = c;
        have = true;
      }
    }
    out.push_back(best);
  }
  return out;
}

DeltaMax delta_max(const NetworkParams& params, const CodeSpec& code, Scheme scheme,
                   bool incoming) {
  const double ref = params.M * params.omega * params.rho_bs;
  auto f = [&](double d) { return evaluate_cost(params, code, scheme, d, incoming).total - ref; };
  const double s = scale_of(params);
  const auto grid = log_grid(kGridLo * s, kGridHi * s, kGridPoints);

  int last = -1;
  for (int i = 0; i < kGridPoints; ++i) {
    if (f(grid[i]) < 0) last = i;
  }
  if (last < 0) return {};

  double lo = grid[last], hi;
  if (last + 1 < kGridPoints) {
    hi = grid[last + 1];
  } else {
    hi = kFar * s;
    if (f(hi) < 0) return {DeltaMax::Kind::Infinite, 0.0};
  }
  // f(lo) < 0 <= f(hi)
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0 ? lo : hi) = mid;
  }
  return {DeltaMax::Kind::Finite, 0.5 * (lo + hi)};
}

double delta_opt(const NetworkParams& params, const CodeSpec& code, Scheme scheme,
                 bool incoming) {
  auto f = [&](double d) { return evaluate_cost(params, code, scheme, d, incoming).total; };
  const double s = scale_of(params);
  const DeltaMax dm = delta_max(params, code, scheme, incoming);
  const double upper = dm.kind == DeltaMax::Kind::Finite ? dm.value : kGridHi * s;
  const double lower = std::min(kGridLo * s, upper * 1e-3);
  const auto grid = log_grid(lower, upper, kGridPoints);

  int best = 0;
  double best_val = f(grid[0]);
  for (int i = 1; i < kGridPoints; ++i) {
    const double v = f(grid[i]);
    if (v < best_val) {
      best = i;
      best_val = v;
    }
  }
  const double a = grid[std::max(best - 1, 0)];
  const double b = grid[std::min(best + 1, kGridPoints - 1)];
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, a, b, 40);
  double arg = grid[best];
  if (fx < best_val) {
    arg = x;
    best_val = fx;
  }
  if (f(0.0) <= best_val) return 0.0;
  return arg;
}

BestDeltaMax best_delta_max(const SearchSpec& spec) {
  spec.validate();
  BestDeltaMax out;
  for (const auto& c : enumerate_codes(spec)) {
    const DeltaMax d = delta_max(spec.params, c, spec.scheme, spec.incoming);
    const auto rank = [](const DeltaMax& x) {
      return x.kind == DeltaMax::Kind::Infinite ? INFINITY
             : x.kind == DeltaMax::Kind::Finite ? x.value
                                                : -1.0;
    };
    if (d.kind != DeltaMax::Kind::None && (!out.code || rank(d) > rank(out.delta_max))) {
      out.delta_max = d;
      out.code = c;
    }
  }
  return out;
}

}  // namespace d2dstore
