#include "d2dstore/incoming.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace d2dstore {

namespace {

constexpr int kMaxIterations = 100000;
// Iterations without progress after which a residual within kStallFactor of
// the tolerance is accepted as round-off.
constexpr int kStallIterations = 200;
constexpr double kStallFactor = 100.0;
constexpr double kSlowRate = 0.5;
constexpr long long kMaxStride = 1LL << 40;

// Applies the repair map: an empty class is refilled with one node.
void refill(std::vector<double>& x) {
  x[1] += x[0];
  x[0] = 0.0;
}

void normalize(std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  for (double& v : x) v /= s;
}

double linf(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

void ChainConfig::validate() const {
  if (S < 2) throw ConstraintError("S >= 2", "S = " + std::to_string(S));
  if (!(mu >= 0.0)) throw ConstraintError("mu >= 0", "mu = " + std::to_string(mu));
  if (!(lambda_c >= 0.0) || lambda_c > mu) {
    throw ConstraintError("0 <= lambda_c <= mu", "lambda_c = " + std::to_string(lambda_c));
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ConstraintError("delta >= 0", "delta = " + std::to_string(delta));
  }
  if (!(tol > 0.0)) throw ConstraintError("tol > 0", "tol = " + std::to_string(tol));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::operator*(const Matrix& b) const {
  Matrix c(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = 0; k < n_; ++k) {
      const double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

double Matrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j);
  return s;
}

double Matrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

std::vector<double> left_multiply(const std::vector<double>& x, const Matrix& a) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t j = 0; j < a.size(); ++j) y[j] += x[i] * a(i, j);
  }
  return y;
}

Matrix generator(const ChainConfig& cfg) {
  cfg.validate();
  const auto S = static_cast<std::size_t>(cfg.S);
  Matrix g(S);
  for (std::size_t i = 0; i < S; ++i) {
    if (i + 1 < S) g(i, i + 1) = cfg.lambda_c;
    if (i > 0) g(i, i - 1) = static_cast<double>(i) * cfg.mu;
    g(i, i) = -((i + 1 < S ? cfg.lambda_c : 0.0) + static_cast<double>(i) * cfg.mu);
  }
  return g;
}

Matrix transition_matrix(const ChainConfig& cfg) {
  const Matrix g = generator(cfg);
  const std::size_t S = g.size();
  double rate = 0.0;
  for (std::size_t i = 0; i < S; ++i) rate = std::max(rate, -g(i, i));
  if (rate == 0.0 || cfg.delta == 0.0) return Matrix::identity(S);

  // Halve the step until ||delta*G|| / 2^s <= 0.5.
  int s = 0;
  double step = cfg.delta;
  while (step * g.norm_inf() > 0.5) {
    step *= 0.5;
    ++s;
  }

  // exp(step*G) = e^{-x} sum_k x^k/k! U^k with U = I + G/rate, x = rate*step.
  Matrix u = Matrix::identity(S);
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = 0; j < S; ++j) u(i, j) += g(i, j) / rate;
  }
  const double x = rate * step;
  Matrix power = Matrix::identity(S);
  Matrix e(S);
  double weight = std::exp(-x);
  double mass = 0.0;
  for (int k = 0; k < 200; ++k) {
    for (std::size_t i = 0; i < S * S; ++i) {
      e(i / S, i % S) += weight * power(i / S, i % S);
    }
    mass += weight;
    if (1.0 - mass < 1e-17) break;
    power = power * u;
    weight *= x / (k + 1);
  }
  for (int i = 0; i < s; ++i) e = e * e;
  return e;
}

double StationaryDist::nonempty() const {
  double s = 0.0;
  for (std::size_t i = 1; i < q.size(); ++i) s += q[i];
  return s;
}

StationaryDist stationary(const ChainConfig& cfg, std::vector<double> start) {
  cfg.validate();
  const auto S = static_cast<std::size_t>(cfg.S);
  StationaryDist out;

  if (cfg.lambda_c == 0.0 && start.empty()) {
    // Pure death from one node: the fixed point is reached immediately.
    out.q_tilde.assign(S, 0.0);
    out.q_tilde[1] = 1.0;
    out.q.assign(S, 0.0);
    out.q[0] = -std::expm1(-cfg.mu * cfg.delta);
    out.q[1] = std::exp(-cfg.mu * cfg.delta);
    return out;
  }

  if (start.empty()) {
    start.assign(S, 0.0);
    start[1] = 1.0;
  }
  if (start.size() != S) throw std::invalid_argument("stationary: start has wrong length");
  refill(start);

  const Matrix p = transition_matrix(cfg);
  // One repair interval with the refill folded in: column 0 moves to column 1.
  Matrix step = p;
  for (std::size_t i = 0; i < S; ++i) {
    step(i, 1) += step(i, 0);
    step(i, 0) = 0.0;
  }
  std::vector<double> cur = std::move(start);
  normalize(cur);
  long long applied = 0, stride = 1;
  double prev_d = 0.0, best_d = INFINITY;
  int best_at = 0;
  for (int it = 1; it <= kMaxIterations; ++it) {
    std::vector<double> next = left_multiply(cur, step);
    normalize(next);
    applied += stride;
    const double d = linf(next, cur);
    cur = std::move(next);
    out.residual = d;
    if (d < best_d) {
      best_d = d;
      best_at = it;
    }
    const bool stalled = it - best_at > kStallIterations && best_d < kStallFactor * cfg.tol;
    if (d < cfg.tol || stalled) {
      out.iterations = applied > INT_MAX ? INT_MAX : static_cast<int>(applied);
      out.q_tilde = cur;
      out.q = left_multiply(cur, p);
      return out;
    }
    // Slow contraction: continue with the square of the current operator, so
    // that successive iterates are (P X)^N for rapidly growing N.
    if (prev_d > 0.0 && d > kSlowRate * prev_d && stride < kMaxStride) {
      step = step * step;
      stride *= 2;
      prev_d = 0.0;
      best_d = INFINITY;
      continue;
    }
    prev_d = d;
  }
  std::ostringstream os;
  os << "stationary: no convergence after " << kMaxIterations
     << " iterations, residual = " << out.residual;
  throw std::runtime_error(os.str());
}

double effective_rate(const StationaryDist& dist, double mu) {
  // E[U] = (1/mu) * sum_l q_tilde_l * H_l with H_l the l-th harmonic number.
  double weighted = 0.0, harmonic = 0.0;
  for (std::size_t l = 1; l < dist.q_tilde.size(); ++l) {
    harmonic += 1.0 / static_cast<double>(l);
    weighted += dist.q_tilde[l] * harmonic;
  }
  if (!(weighted > 0.0)) {
    throw std::domain_error("effective_rate: E[U] = 0, no mass on non-empty classes");
  }
  return mu / weighted;
}

double single_node_fraction(double lambda_c, double mu) {
  if (lambda_c == 0.0 || mu == 0.0) return 1.0;
  const double nu = lambda_c / mu;
  return nu / std::expm1(nu);
}

ChainConfig chain_for(const CostQuery& query, int S) {
  ChainConfig cfg;
  cfg.lambda_c = query.params.lambda_c;
  cfg.mu = query.params.mu;
  cfg.delta = query.delta;
  cfg.S = S;
  return cfg;
}

double incoming_repair_cost(const CostQuery& q, const StationaryDist& dist) {
  const Survival s{dist.nonempty(), dist.empty()};
  return repair_split(q.params, q.code, q.scheme, q.delta, s).total();
}

double incoming_download_cost(const CostQuery& q, double mu_eff) {
  return download_split(q.params, q.code, q.scheme, q.delta, mu_eff).total();
}

CostBreakdown incoming_overall_cost(const CostQuery& q, int S) {
  q.params.validate();
  const auto& np = q.params;
  if (q.delta == 0.0) {
    return limit_breakdown(np, q.code, np.mu * single_node_fraction(np.lambda_c, np.mu));
  }
  if (np.mu == 0.0) return overall_cost(q);
  return incoming_overall_cost(q, stationary(chain_for(q, S)));
}

CostBreakdown incoming_overall_cost(const CostQuery& q, const StationaryDist& dist) {
  const auto& np = q.params;
  if (q.delta == 0.0) {
    return limit_breakdown(np, q.code, np.mu * single_node_fraction(np.lambda_c, np.mu));
  }
  const Split r = repair_split(np, q.code, q.scheme, q.delta, {dist.nonempty(), dist.empty()});
  const Split d = download_split(np, q.code, q.scheme, q.delta, effective_rate(dist, np.mu));
  return make_breakdown(r.bs, r.d2d, d.bs, d.d2d, np);
}

}  // namespace d2dstore
