#include <cmath>

#include <doctest.h>

#include "d2dstore/incoming.hpp"
#include "golden.hpp"

using namespace d2dstore;

namespace {

ChainConfig chain(double lc, double mu, double delta, int S = 20) {
  ChainConfig c;
  c.lambda_c = lc;
  c.mu = mu;
  c.delta = delta;
  c.S = S;
  return c;
}

const CodeSpec kMds933 = derive_code(CodeFamily::MDS, 9, 3, 3);

}  // namespace

TEST_CASE("generator") {
  const Matrix g2 = generator(chain(0.4, 1.0, 1.0, 2));
  CHECK(g2(0, 0) == -0.4);
  CHECK(g2(0, 1) == 0.4);
  CHECK(g2(1, 0) == 1.0);
  CHECK(g2(1, 1) == -1.0);
  const Matrix g = generator(chain(0.7, 1.3, 1.0, 12));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g.row_sum(i)) < 1e-15);
  CHECK(g(5, 4) == doctest::Approx(5 * 1.3));
  const Matrix d = generator(chain(0.0, 1.0, 1.0, 6));
  for (std::size_t i = 0; i + 1 < d.size(); ++i) CHECK(d(i, i + 1) == 0.0);
  CHECK_THROWS_AS(generator(chain(0.5, 1.0, 1.0, 1)), ConstraintError);
  CHECK_THROWS_AS(generator(chain(1.5, 1.0, 1.0)), ConstraintError);
}

TEST_CASE("transition_matrix") {
  SUBCASE("zero interval gives the identity") {
    const Matrix p = transition_matrix(chain(0.5, 1.0, 0.0));
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) CHECK(p(i, j) == (i == j ? 1.0 : 0.0));
    }
  }
  SUBCASE("two-state closed form") {
    const double a = 0.6, b = 1.4, d = 0.8;
    const Matrix p = transition_matrix(chain(a, b, d, 2));
    const double e = std::exp(-(a + b) * d);
    CHECK(p(0, 0) == doctest::Approx((b + a * e) / (a + b)).epsilon(1e-13));
    CHECK(p(0, 1) == doctest::Approx(a * (1 - e) / (a + b)).epsilon(1e-13));
    CHECK(p(1, 0) == doctest::Approx(b * (1 - e) / (a + b)).epsilon(1e-13));
    CHECK(p(1, 1) == doctest::Approx((a + b * e) / (a + b)).epsilon(1e-13));
  }
  SUBCASE("pure death from one node") {
    for (double d : {0.01, 1.0, 6.0}) {
      const Matrix p = transition_matrix(chain(0.0, 1.0, d, 30));
      CHECK(p(1, 0) == doctest::Approx(1 - std::exp(-d)).epsilon(1e-13));
    }
  }
  SUBCASE("stochastic rows") {
    for (double d : {1e-3, 0.3, 2.0, 50.0}) {
      const Matrix p = transition_matrix(chain(1.0, 1.0, d));
      for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(std::abs(p.row_sum(i) - 1.0) < 1e-10);
        for (std::size_t j = 0; j < p.size(); ++j) {
          CHECK(p(i, j) >= 0.0);
          CHECK(p(i, j) <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("stationary") {
  SUBCASE("no incoming nodes recovers plain survival") {
    const auto s = stationary(chain(0.0, 1.0, 0.7));
    CHECK(s.q_tilde[1] == 1.0);
    CHECK(s.q[0] == -std::expm1(-0.7));
    CHECK(s.nonempty() == std::exp(-0.7));
  }
  SUBCASE("matches the class Monte-Carlo golden") {
    const auto s = stationary(chain(1.0, 1.0, 1.0));
    const auto& g = goldens().at("incoming_q_lambda1_delta1");
    for (std::size_t i = 0; i < 6; ++i) {
      const double ref = g.at("value")[i].get<double>();
      const double err = g.at("stderr")[i].get<double>();
      CAPTURE(i);
      CHECK(std::abs(s.q[i] - ref) <= 3 * err);
    }
  }
  SUBCASE("independent of the starting vector") {
    for (double lc : {0.2, 0.5, 1.0}) {
      for (double d : {0.05, 1.0, 3.0}) {
        const auto cfg = chain(lc, 1.0, d);
        const auto a = stationary(cfg);
        std::vector<double> start(20, 0.0);
        start[7] = 0.5;
        start[0] = 0.5;
        const auto b = stationary(cfg, start);
        for (std::size_t i = 0; i < a.q.size(); ++i) CHECK(std::abs(a.q[i] - b.q[i]) < 10 * cfg.tol);
      }
    }
  }
  SUBCASE("fixed point, normalization and truncation") {
    for (double d : {0.01, 0.5, 2.0}) {
      const auto cfg = chain(1.0, 1.0, d);
      const auto s = stationary(cfg);
      CHECK(s.q_tilde[0] == 0.0);
      double a = 0, b = 0;
      for (std::size_t i = 0; i < s.q.size(); ++i) {
        CHECK(s.q[i] >= 0);
        a += s.q[i];
        b += s.q_tilde[i];
      }
      CHECK(std::abs(a - 1) < 1e-10);
      CHECK(std::abs(b - 1) < 1e-10);
      CHECK(s.q.back() < 1e-10);
      auto next = left_multiply(s.q_tilde, transition_matrix(cfg));
      next[1] += next[0];
      next[0] = 0;
      const auto again = left_multiply(next, transition_matrix(cfg));
      for (std::size_t i = 0; i < s.q.size(); ++i) CHECK(std::abs(again[i] - s.q[i]) < cfg.tol);
      const auto wide = stationary(chain(1.0, 1.0, d, 40));
      CHECK(std::abs(wide.q[0] - s.q[0]) < 1e-9);
    }
  }
}

TEST_CASE("effective_rate") {
  StationaryDist d;
  d.q_tilde = {0, 1, 0, 0};
  CHECK(effective_rate(d, 1.7) == 1.7);
  d.q_tilde = {0, 0, 1, 0};
  CHECK(effective_rate(d, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  d.q_tilde = {1, 0, 0, 0};
  CHECK_THROWS(effective_rate(d, 1.0));
  const auto& g = goldens().at("incoming_mu_eff_lambda1_delta1");
  const double mu_eff = effective_rate(stationary(chain(1.0, 1.0, 1.0)), 1.0);
  CHECK(std::abs(mu_eff - g.at("value").get<double>()) <= 3 * g.at("stderr").get<double>());
}

TEST_CASE("incoming costs") {
  NetworkParams np;
  SUBCASE("no incoming nodes reproduces the plain costs exactly") {
    for (const auto& c : {kMds933, derive_code(CodeFamily::MSR, 9, 3, 8),
                          derive_code(CodeFamily::LRC, 6, 3, 2), replication(2)}) {
      for (auto s : {Scheme::Conventional, Scheme::Hybrid}) {
        for (double d : {0.0, 0.01, 0.5, 2.0}) {
          const CostQuery q{np, c, s, d};
          const auto a = incoming_overall_cost(q);
          const auto b = overall_cost(q);
          CHECK(a.repair_bs == b.repair_bs);
          CHECK(a.repair_d2d == b.repair_d2d);
          CHECK(a.download_bs == b.download_bs);
          CHECK(a.download_d2d == b.download_d2d);
        }
      }
    }
  }
  SUBCASE("MDS [9,3,3] repair matches the class Monte-Carlo golden") {
    np.lambda_c = 1.0;
    const CostQuery q{np, kMds933, Scheme::Conventional, 1.0};
    const double v = incoming_repair_cost(q, stationary(chain_for(q)));
    const auto& g = goldens().at("incoming_mds933_repair_lambda1_delta1");
    CHECK(std::abs(v - g.at("value").get<double>()) <= 3 * g.at("stderr").get<double>());
  }
  SUBCASE("costs fall as lambda_c grows") {
    for (double d : {0.0, 0.05, 0.5, 1.0, 3.0}) {
      double prev_r = INFINITY, prev_t = INFINITY;
      for (double lc : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        np.lambda_c = lc;
        const CostQuery q{np, kMds933, Scheme::Conventional, d};
        const auto b = incoming_overall_cost(q);
        CHECK(b.repair() <= prev_r);
        CHECK(b.total <= prev_t);
        if (d > 0 && lc > 0) CHECK(b.repair() < prev_r);
        prev_r = b.repair();
        prev_t = b.total;
      }
    }
  }
  SUBCASE("DS beats BS download at every interval with lambda_c = mu") {
    np.lambda_c = 1.0;
    for (double d = 1e-3; d <= 100; d *= 1.25) {
      CHECK(incoming_overall_cost({np, kMds933, Scheme::Conventional, d}).normalized < 1.0);
    }
  }
  SUBCASE("instantaneous-repair limit is continuous") {
    np.lambda_c = 0.6;
    const double lim = incoming_overall_cost({np, kMds933, Scheme::Conventional, 0.0}).total;
    const double near = incoming_overall_cost({np, kMds933, Scheme::Conventional, 1e-4}).total;
    CHECK(near == doctest::Approx(lim).epsilon(1e-3));
    CHECK(single_node_fraction(0.6, 1.0) == doctest::Approx(0.6 / std::expm1(0.6)));
  }
}
