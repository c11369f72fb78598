#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "zigzag/lmc.hpp"
#include "zigzag/statistics.hpp"

using namespace zigzag;

TEST(LmcStep, FromMinimizerIsPureNoise) {
  IsotropicGaussianPotential p(1, 1.0);
  CountingOracle<IsotropicGaussianPotential> oracle(p);
  Rng rng(41);
  const double h = 0.3;
  const int n = 100000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = lmc_step(Point{0.0}, oracle, h, rng)[0];
  const auto mv = stats::mean_var(xs);
  EXPECT_NEAR(mv.mean, 0.0, 3.0 * std::sqrt(2.0 * h / n));
  EXPECT_NEAR(mv.variance, 2.0 * h, 3.0 * 2.0 * h * std::sqrt(2.0 / (n - 1)));
  EXPECT_EQ(oracle.eval_count(), static_cast<std::uint64_t>(n));
}

TEST(LmcStep, OneStepVariance) {
  IsotropicGaussianPotential p(1, 1.0);
  CountingOracle<IsotropicGaussianPotential> oracle(p);
  Rng rng(42);
  const double h = 0.1;
  const int n = 100000;
  std::vector<double> xs(n);
  for (auto& x : xs) {
    const Point x0{std::sqrt(0.5) * rng.normal()};
    x = lmc_step(x0, oracle, h, rng)[0];
  }
  const double target = (1.0 - h) * (1.0 - h) * 0.5 + 2.0 * h;
  EXPECT_DOUBLE_EQ(target, 0.605);
  const auto mv = stats::mean_var(xs);
  EXPECT_NEAR(mv.variance, target, 3.0 * target * std::sqrt(2.0 / (n - 1)));
}

TEST(LmcStep, StationaryVarianceIsBiased) {
  IsotropicGaussianPotential p(1, 1.0);
  const double h = 0.1;
  const double fixed = 2.0 * h / (1.0 - (1.0 - h) * (1.0 - h));
  EXPECT_NEAR(fixed, 0.2 / 0.19, 1e-15);
  EXPECT_GT(fixed, 1.0);
  LmcSchedule s{200, h, 0.0};
  Rng rng(43);
  const int n = 20000;
  std::vector<double> xs(n);
  for (auto& x : xs) {
    Point y{0.0};
    run_lmc(p, s, y, rng);
    x = y[0];
  }
  const auto mv = stats::mean_var(xs);
  EXPECT_NEAR(mv.variance, fixed, 3.0 * fixed * std::sqrt(2.0 / (n - 1)));
}

TEST(LmcStep, CountsFullGradients) {
  DiagonalGaussianPotential p({1.0, 2.0, 3.0, 4.0});
  LmcSchedule s{7, 0.01, 0.0};
  Rng rng(44);
  Point x(4, 1.0);
  EXPECT_EQ(run_lmc(p, s, x, rng), 28u);
  CountingOracle<DiagonalGaussianPotential> oracle(p);
  EXPECT_THROW(lmc_step(x, oracle, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(lmc_step(Point{1.0}, oracle, 0.1, rng), std::invalid_argument);
}

TEST(CorollarySchedule, ReferenceValues) {
  const auto c = corollary_schedule(256, 1.0, 1.0);
  EXPECT_EQ(c.schedule.n_steps, 85u);
  EXPECT_NEAR(c.schedule.step_size, 0.05252, 5e-5);
  EXPECT_NEAR(c.schedule.step_size, 0.8 * std::pow(256.0, -0.8) * std::log(256.0), 1e-15);
  EXPECT_DOUBLE_EQ(c.schedule.init_cov_scale, 0.5);
  EXPECT_TRUE(c.step_condition);
}

TEST(CorollarySchedule, ExactPowersStayExact) {
  // 32^(4/5) = 16 exactly; the ceiling must not round up to 17.
  EXPECT_EQ(corollary_schedule(32, 1.0, 1.0).schedule.n_steps, 16u);
  EXPECT_EQ(corollary_schedule(1024, 1.0, 1.0).schedule.n_steps, 256u);
}

TEST(CorollarySchedule, GeneralKappa) {
  const double d = 500, m = 0.5, L = 1.0, kappa = 2.0;
  const auto c = corollary_schedule(500, m, L);
  const double scale = std::pow(d, 0.8) * std::pow(kappa, 3.2);
  EXPECT_EQ(c.schedule.n_steps, static_cast<std::size_t>(std::ceil(scale)));
  EXPECT_NEAR(c.schedule.step_size, 0.8 / scale / m * std::log(d / kappa), 1e-15);
  EXPECT_DOUBLE_EQ(c.schedule.init_cov_scale, 0.5);
  EXPECT_DOUBLE_EQ(c.kappa, 2.0);
  EXPECT_NEAR(c.regime_ratio, std::pow(2.0, 1.8) * std::pow(std::log(d), 3) / std::pow(d, 0.8),
              1e-12);
}

TEST(CorollarySchedule, StepConditionInRegime) {
  for (std::size_t d : {64u, 256u, 4096u, 100000u}) {
    for (double L : {1.0, 1.5, 2.0}) {
      const auto c = corollary_schedule(d, 1.0, L);
      if (c.regime_ratio <= 1.0) {
        EXPECT_LE(c.schedule.step_size, 1.0 / (4.0 * L * L)) << d << " " << L;
      }
    }
  }
}

TEST(CorollarySchedule, Errors) {
  EXPECT_THROW(corollary_schedule(4, 1.0, 4.0), std::domain_error);
  EXPECT_THROW(corollary_schedule(4, 1.0, 8.0), std::domain_error);
  EXPECT_THROW(corollary_schedule(1, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(corollary_schedule(10, 2.0, 1.0), std::invalid_argument);
}

TEST(Hybrid, CostSplitAndTerminalTime) {
  IsotropicGaussianPotential p(10, 1.0);
  HybridConfig hc;
  hc.epsilon = 1.0;
  hc.seed = 45;
  const auto r = hybrid_sample(p, hc, 8);
  const auto c = corollary_schedule(10, 1.0, 1.0);
  EXPECT_EQ(r.schedule.n_steps, c.schedule.n_steps);
  EXPECT_EQ(r.lmc_evals, 8u * c.schedule.n_steps * 10u);
  EXPECT_EQ(r.zigzag_evals, r.samples.stats.n_proposed);
  const double lg = std::log(10.0);
  EXPECT_NEAR(r.terminal_time, std::pow(10.0, 0.2) * lg * lg, 1e-12);
  EXPECT_EQ(r.samples.positions.size(), 8u);
}

TEST(Hybrid, WarmStartUsesTrajectoryStream) {
  IsotropicGaussianPotential p(3, 1.0);
  SamplerConfig cfg;
  cfg.terminal_time = 1.0;
  cfg.seed = 46;
  const LmcSchedule s{5, 0.1, 0.0};
  const auto a = sample_with_warmstart(p, cfg, PointMass{}, s, 10, 1);
  const auto b = sample_with_warmstart(p, cfg, PointMass{}, s, 10, 2);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.warmstart_evals, 10u * 5u * 3u);
  const auto none = sample_with_warmstart(p, cfg, PointMass{}, std::nullopt, 10, 1);
  EXPECT_EQ(none.warmstart_evals, 0u);
  EXPECT_NE(none.positions, a.positions);
}
