#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "zigzag/random.hpp"
#include "zigzag/statistics.hpp"

using namespace zigzag;

TEST(Statistics, KolmogorovCriticalValues) {
  // tabulated asymptotic critical values
  EXPECT_NEAR(stats::kolmogorov_sf(1.3581), 0.05, 2e-4);
  EXPECT_NEAR(stats::kolmogorov_sf(1.6276), 0.01, 1e-4);
  EXPECT_NEAR(stats::kolmogorov_sf(1.2239), 0.10, 2e-4);
  EXPECT_DOUBLE_EQ(stats::kolmogorov_sf(0.0), 1.0);
}

TEST(Statistics, KsAcceptsCorrectAndRejectsShifted) {
  Rng rng(51);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = rng.normal();
  auto cdf = [](double v) { return oracle::normal_cdf(v); };
  EXPECT_GE(stats::ks_test(xs, cdf).p_value, 0.01);
  for (auto& x : xs) x += 0.05;
  EXPECT_LT(stats::ks_test(xs, cdf).p_value, 0.01);
}

TEST(Statistics, EcdfDistanceSmallCase) {
  // samples {0.5} against U(0,1): D = max(1 - 0.5, 0.5 - 0) = 0.5
  EXPECT_DOUBLE_EQ(stats::ecdf_sup_distance({0.5}, [](double v) { return v; }), 0.5);
  EXPECT_NEAR(stats::ecdf_sup_distance({0.25, 0.75}, [](double v) { return v; }), 0.25, 1e-15);
}

TEST(Statistics, Dkw) {
  EXPECT_NEAR(stats::dkw_epsilon(100000, 0.01), std::sqrt(std::log(200.0) / 200000.0), 1e-15);
}

TEST(Statistics, ChiSquare) {
  // one degree of freedom: statistic 3.841459 has p = 0.05
  const std::vector<double> obs{50.0 + std::sqrt(3.841459 * 25.0), 50.0 - std::sqrt(3.841459 * 25.0)};
  const std::vector<double> prob{0.5, 0.5};
  const auto r = stats::chi_square_gof(obs, prob);
  EXPECT_EQ(r.dof, 1u);
  EXPECT_NEAR(r.statistic, 3.841459, 1e-9);
  EXPECT_NEAR(r.p_value, 0.05, 1e-6);
  EXPECT_THROW(stats::chi_square_gof(obs, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Statistics, ChiSquarePoolsSmallCells) {
  const std::vector<double> obs{90, 8, 1, 1};
  const std::vector<double> prob{0.9, 0.08, 0.01, 0.01};
  const auto r = stats::chi_square_gof(obs, prob);
  EXPECT_EQ(r.dof, 1u);  // cells {90}, {8, 1, 1}
  EXPECT_NEAR(r.statistic, 0.0, 1e-12);
}

TEST(Statistics, OlsAndLogLog) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = stats::ols(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.slope_standard_error, 0.0, 1e-14);
  const std::vector<double> d{8, 16, 32, 64}, e{3 * std::pow(8.0, 1.5), 3 * std::pow(16.0, 1.5),
                                               3 * std::pow(32.0, 1.5), 3 * std::pow(64.0, 1.5)};
  EXPECT_NEAR(stats::loglog_fit(d, e).slope, 1.5, 1e-12);
  EXPECT_THROW(stats::loglog_fit(std::vector<double>{1, -1}, std::vector<double>{1, 1}),
               std::invalid_argument);
  EXPECT_THROW(stats::ols(std::vector<double>{1, 1}, std::vector<double>{1, 2}),
               std::invalid_argument);
}

TEST(Statistics, MeanVarAndPoissonCells) {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto mv = stats::mean_var(xs);
  EXPECT_DOUBLE_EQ(mv.mean, 2.5);
  EXPECT_NEAR(mv.variance, 5.0 / 3.0, 1e-15);
  const auto p = stats::poisson_cells(3.0, 12);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    s += p[k];
    if (k + 1 < p.size()) {
      EXPECT_NEAR(p[k], oracle::poisson_pmf(k, 3.0), 1e-15);
    }
  }
  EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(Statistics, NormalCdf) {
  for (double x : {-5.0, -1.0, 0.0, 0.3, 2.0, 8.0}) {
    EXPECT_NEAR(stats::normal_cdf(x), oracle::normal_cdf(x), 1e-15);
    EXPECT_NEAR(stats::normal_sf(x), oracle::normal_sf(x), 1e-15 + 1e-13 * oracle::normal_sf(x));
  }
}
