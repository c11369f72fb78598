// Built without NDEBUG so the per-segment sup-U assertion inside the sampler
// loop is active.
#ifdef NDEBUG
#error "this test must be compiled with assertions enabled"
#endif

#include <gtest/gtest.h>

#include "zigzag/sampler.hpp"

using namespace zigzag;

TEST(DebugAssertions, SegmentMaximumAtEndpoints) {
  SoftenedQuadraticPotential soft(5, 1.0, 2.0);
  DiagonalGaussianPotential diag({0.5, 1.0, 3.0});
  SamplerConfig cfg;
  cfg.terminal_time = 20.0;
  cfg.seed = 81;
  const auto a = sample(soft, cfg, PointMass{}, 20);
  const auto b = sample(diag, cfg, PointMass{{2.0, -1.0, 0.5}}, 20);
  EXPECT_GT(a.stats.n_proposed, 0u);
  EXPECT_GT(b.stats.n_proposed, 0u);
}
