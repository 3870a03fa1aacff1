#include <cmath>

#include <doctest.h>

#include "d2dstore/core_model.hpp"

using namespace d2dstore;

TEST_CASE("derive_code fills per-family bandwidths") {
  SUBCASE("MDS [9,3,3]") {
    const auto c = derive_code(CodeFamily::MDS, 9, 3, 3);
    CHECK(c.alpha_frac == Ratio(1, 3));
    CHECK(c.beta_frac == Ratio(1, 3));
    CHECK(c.gamma_d2d_frac() == Ratio(1));
    CHECK(c.n == 9);
    CHECK(c.k == 3);
  }
  SUBCASE("MSR [9,3,8]") {
    const auto c = derive_code(CodeFamily::MSR, 9, 3, 8);
    CHECK(c.alpha_frac == Ratio(1, 3));
    CHECK(c.beta_frac == Ratio(1, 18));
    CHECK(c.gamma_d2d_frac() == Ratio(4, 9));
    CHECK(c.n == 54);
    CHECK(c.k == 18);
  }
  SUBCASE("MBR [9,5,8]") {
    const auto c = derive_code(CodeFamily::MBR, 9, 5, 8);
    CHECK(c.alpha_frac == Ratio(16, 60));
    CHECK(c.beta_frac == Ratio(2, 60));
    CHECK(c.k == 30);
    CHECK(c.n == 72);
  }
  SUBCASE("LRC [6,3,2]") {
    const auto c = derive_code(CodeFamily::LRC, 6, 3, 2);
    CHECK(c.alpha_frac == Ratio(1, 2));
    CHECK(c.gamma_d2d_frac() == Ratio(1));
    CHECK(c.G == 2);
    CHECK(c.n == 18);
    CHECK(c.k == 6);
  }
  SUBCASE("2-replication") {
    const auto c = replication(2);
    CHECK(c.alpha_frac == Ratio(1));
    CHECK(c.h == 1);
    CHECK(c.r == 1);
    CHECK(c.gamma_d2d() == 1.0);
    CHECK(c.label() == "Replication[2,1,1]");
  }
  SUBCASE("F scales bandwidths") {
    const auto c = derive_code(CodeFamily::MDS, 9, 3, 3, 300.0);
    CHECK(c.alpha() == doctest::Approx(100.0));
    CHECK(c.gamma_d2d() == doctest::Approx(300.0));
  }
}

TEST_CASE("derive_code rejects invalid parameters with the violated constraint") {
  auto constraint_of = [](auto f) {
    try {
      f();
    } catch (const ConstraintError& e) {
      return e.constraint();
    }
    return std::string("none");
  };
  CHECK(constraint_of([] { derive_code(CodeFamily::MSR, 9, 4, 5); }) == "MSR r >= 2(h-1)");
  CHECK(constraint_of([] { derive_code(CodeFamily::LRC, 7, 3, 2); }) == "LRC (r+1) | m");
  CHECK(constraint_of([] { derive_code(CodeFamily::LRC, 6, 2, 2); }) == "LRC 1 <= r < h");
  CHECK(constraint_of([] { derive_code(CodeFamily::MDS, 9, 3, 4); }) == "MDS r = h");
  CHECK(constraint_of([] { derive_code(CodeFamily::MBR, 9, 3, 9); }) == "r < m");
  CHECK(constraint_of([] { derive_code(CodeFamily::MDS, 1, 1, 1); }) == "m >= 2");
  CHECK(constraint_of([] { derive_code(CodeFamily::MSR, 9, 2, 2); }) == "none");
}

TEST_CASE("code invariants hold for every admissible small code") {
  for (int m = 2; m <= 10; ++m) {
    for (int h = 1; h < m; ++h) {
      for (int r = 1; r < m; ++r) {
        for (auto f : {CodeFamily::MDS, CodeFamily::MSR, CodeFamily::MBR, CodeFamily::LRC}) {
          CodeSpec c;
          try {
            c = derive_code(f, m, h, r);
          } catch (const ConstraintError&) {
            continue;
          }
          CAPTURE(c.label());
          // alpha * m * R = F with R = k / n
          CHECK(c.alpha_frac * static_cast<std::int64_t>(m) * Ratio(c.k, c.n) == Ratio(1));
          CHECK(c.beta_frac <= c.alpha_frac);
          CHECK(c.gamma_d2d_frac() >= c.alpha_frac);
          CHECK(c.gamma_d2d_frac() <= Ratio(1));
          if (f == CodeFamily::MDS) CHECK(c.gamma_d2d_frac() == Ratio(1));
          if (h == 1 && (f == CodeFamily::MSR || f == CodeFamily::MBR)) {
            // same cost inputs as m-replication
            const auto rep = replication(m);
            CHECK(c.alpha_frac == rep.alpha_frac);
            CHECK(c.gamma_d2d_frac() == rep.gamma_d2d_frac());
            CHECK(c.h == rep.h);
          }
        }
      }
    }
  }
}

TEST_CASE("poisson_occupancy") {
  CHECK(poisson_occupancy(0, 30, 1, 1) == doctest::Approx(std::exp(-30.0)).epsilon(1e-12));
  CHECK(poisson_occupancy(1, 1, 1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  double low = 0.0, all = 0.0;
  for (int i = 0; i <= 9; ++i) low += poisson_occupancy(i, 30, 1, 1);
  for (int i = 0; i <= 200; ++i) all += poisson_occupancy(i, 30, 1, 1);
  CHECK(low < 7.2e-6);
  CHECK(all == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binomial_pmf") {
  CHECK(binomial_pmf(2, 3, 0.5) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(binomial_pmf(4, 4, 1.0) == 1.0);
  const double p = std::exp(-0.5);
  CHECK(binomial_pmf(0, 9, p) == doctest::Approx(std::pow(1 - p, 9)).epsilon(1e-13));
  CHECK_THROWS_AS(binomial_pmf(4, 3, 0.5), std::out_of_range);
  CHECK_THROWS_AS(binomial_pmf(-1, 3, 0.5), std::out_of_range);
  for (int m = 1; m <= 64; ++m) {
    for (double q : {0.01, 0.3, 0.77}) {
      double s = 0;
      for (int i = 0; i <= m; ++i) s += binomial_pmf(i, m, q);
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("NetworkParams validation") {
  NetworkParams np;
  CHECK_NOTHROW(np.validate());
  CHECK(np.mu == np.lambda);
  np.lambda_c = 2.0;
  CHECK_THROWS_AS(np.validate(), ConstraintError);
  np = {};
  np.rho_d2d = 0;
  CHECK_THROWS_AS(np.validate(), ConstraintError);
  np = {};
  np.mu = 0;
  CHECK_NOTHROW(np.validate());
}

TEST_CASE("make_breakdown normalizes by the BS download cost") {
  NetworkParams np;
  const auto b = make_breakdown(1, 2, 3, 4, np);
  CHECK(b.total == 10.0);
  CHECK(b.normalized == doctest::Approx(10.0 / (30 * 0.02 * 40)));
  np.omega = 0;
  CHECK(std::isnan(make_breakdown(1, 0, 0, 0, np).normalized));
}
