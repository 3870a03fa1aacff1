#include "d2dstore/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace d2dstore {

double hypoexp_survival(double t, int h, int m, double mu) {
  if (h < 1 || h > m) throw std::out_of_range("hypoexp_survival: need 1 <= h <= m");
  if (t <= 0.0) return 1.0;
  const double alive = std::exp(-mu * t);
  if (alive <= 0.0) return 0.0;
  boost::math::binomial_distribution<double> d(m, alive);
  return boost::math::cdf(boost::math::complement(d, static_cast<double>(h - 1)));
}

double hypoexp_pdf(double t, int h, int m, double mu) {
  if (h < 1 || h > m) throw std::out_of_range("hypoexp_pdf: need 1 <= h <= m");
  if (t < 0.0) return 0.0;
  double rate_product = 1.0;
  for (int j = h; j <= m; ++j) rate_product *= j * mu;
  double f = 0.0;
  for (int i = h; i <= m; ++i) {
    double den = 1.0;
    for (int j = h; j <= m; ++j) {
      if (j != i) den *= (j - i) * mu;
    }
    f += rate_product / den * std::exp(-i * mu * t);
  }
  return f;
}

double request_phase_pdf(double t, int ell, double omega, double delta) {
  if (ell < 1) throw std::out_of_range("request_phase_pdf: ell must be >= 1");
  if (!(delta > 0.0) || !(omega > 0.0)) {
    throw std::domain_error("request_phase_pdf: omega and delta must be > 0");
  }
  if (t < 0.0 || t >= delta) return 0.0;
  const double log_norm = ell * std::log(omega) - std::lgamma(static_cast<double>(ell));
  auto log_term = [&](long i) {
    const double x = t + i * delta;
    if (x == 0.0) return ell == 1 ? log_norm : -INFINITY;
    return log_norm + (ell - 1) * std::log(x) - omega * x;
  };
  double sum = 0.0;
  for (long i = 0;; ++i) {
    const double term = std::exp(log_term(i));
    sum += term;
    // Consecutive ratios decrease in i, so once below one the tail is
    // bounded by a geometric series.
    const double ratio = std::exp(log_term(i + 1) - log_term(i));
    if (std::isfinite(ratio) && ratio < 1.0) {
      const double tail = term * ratio / (1.0 - ratio);
      if (tail <= 1e-12 * sum) break;
    }
    if (i > 100000000L) throw std::runtime_error("request_phase_pdf: series did not converge");
  }
  return sum;
}

double p_d2d_quadrature(int h, int m, double mu, double delta) {
  if (h < 1 || h > m) throw std::out_of_range("p_d2d_quadrature: need 1 <= h <= m");
  if (!(delta > 0.0)) throw std::domain_error("p_d2d_quadrature: delta must be > 0");
  // Integrates Pr(S_h <= t), which is small for short intervals, so that the
  // relative tolerance applies to the loss rather than to a value near one.
  auto lost = [&](double t) {
    const double alive = std::exp(-mu * t);
    if (alive >= 1.0) return 0.0;
    boost::math::binomial_distribution<double> d(m, alive);
    return boost::math::cdf(d, static_cast<double>(h - 1));
  };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(lost, 0.0, delta, 10, 1e-12);
  return 1.0 - integral / delta;
}

}  // namespace d2dstore
