#pragma once

#include <cstddef>
#include <vector>

#include "d2dstore/analytic.hpp"

namespace d2dstore {

// Occupancy chain of one storage-node class: births at lambda_c, deaths at
// i*mu, states 0..S-1.
struct ChainConfig {
  double lambda_c = 0.0;
  double mu = 1.0;
  int S = 20;
  double delta = 1.0;
  double tol = 1e-14;

  void validate() const;
};

// Row-major dense square matrix.
class Matrix {
 public:
  explicit Matrix(std::size_t n = 0) : n_(n), a_(n * n, 0.0) {}
  static Matrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  Matrix operator*(const Matrix& b) const;
  double row_sum(std::size_t i) const;
  double norm_inf() const;

 private:
  std::size_t n_;
  std::vector<double> a_;
};

// x * A for a row vector x.
std::vector<double> left_multiply(const std::vector<double>& x, const Matrix& a);

Matrix generator(const ChainConfig& cfg);

// exp(delta * G), computed by uniformization on a scaled step followed by
// repeated squaring, so every intermediate entry is non-negative.
Matrix transition_matrix(const ChainConfig& cfg);

struct StationaryDist {
  std::vector<double> q;        // class occupancy just before a repair epoch
  std::vector<double> q_tilde;  // just after it
  int iterations = 0;
  double residual = 0.0;

  // Probability that a class is empty before repair, and its complement.
  double empty() const { return q.at(0); }
  double nonempty() const;
};

// Fixed point of q_tilde <- q_tilde * P * X, where X refills an empty class
// with one node. start defaults to unit mass on state 1. Throws
// std::runtime_error after 100000 iterations without convergence.
StationaryDist stationary(const ChainConfig& cfg, std::vector<double> start = {});

// 1 / E[U], U being the extinction time of a class that starts from q_tilde
// and receives no arrivals.
double effective_rate(const StationaryDist& dist, double mu);

// Fraction of time a class with instantaneous repair holds exactly one node,
// nu / (e^nu - 1) with nu = lambda_c / mu. Classes are lost at mu times this.
double single_node_fraction(double lambda_c, double mu);

ChainConfig chain_for(const CostQuery& query, int S = 20);

// Repair and download costs with classes in place of nodes. Both apply the
// same BS preference rules as overall_cost. The download cost treats class
// lifetimes as exponential with rate mu_eff, which is an approximation.
double incoming_repair_cost(const CostQuery& query, const StationaryDist& dist);
double incoming_download_cost(const CostQuery& query, double mu_eff);
CostBreakdown incoming_overall_cost(const CostQuery& query, int S = 20);
// Same as incoming_overall_cost with the chain already solved for query.delta,
// so that many codes can share one stationary distribution.
CostBreakdown incoming_overall_cost(const CostQuery& query, const StationaryDist& dist);

}  // namespace d2dstore
