#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "zigzag/analytics.hpp"
#include "zigzag/potentials.hpp"
#include "zigzag/random.hpp"
#include "zigzag/sampler.hpp"

namespace zigzag {

struct LmcSchedule {
  std::size_t n_steps = 1;
  double step_size = 0.0;
  /// Variance of the isotropic Gaussian the chains start from.
  double init_cov_scale = 0.0;

  void validate() const {
    if (n_steps == 0) throw std::invalid_argument("LMC needs at least one step");
    if (!(step_size > 0.0)) throw std::invalid_argument("LMC step size must be > 0");
    if (!(init_cov_scale >= 0.0)) throw std::invalid_argument("negative init variance");
  }
};

/// One Euler-Maruyama step x - h grad U(x) + sqrt(2h) xi, xi ~ N(0, Id).
/// Costs one full gradient (dim() partial evaluations).
template <Potential P>
Point lmc_step(std::span<const double> x, CountingOracle<P>& oracle, double h,
               Rng& rng) {
  if (!(h > 0.0)) throw std::invalid_argument("LMC step size must be > 0");
  Point grad(oracle.dim());
  oracle.gradient(x, grad);
  const double noise = std::sqrt(2.0 * h);
  Point next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    next[i] = x[i] - h * grad[i] + noise * rng.normal();
  }
  return next;
}

/// Runs the schedule's n_steps from x in place; returns partial evaluations.
template <Potential P>
std::uint64_t run_lmc(const P& p, const LmcSchedule& schedule, Point& x, Rng& rng) {
  CountingOracle<P> oracle(p);
  for (std::size_t n = 0; n < schedule.n_steps; ++n) {
    x = lmc_step(x, oracle, schedule.step_size, rng);
  }
  return oracle.eval_count();
}

struct CorollarySchedule {
  LmcSchedule schedule;
  double kappa = 1.0;
  /// The step-size condition h <= m / (4 L^2).
  bool step_condition = false;
  /// kappa^(9/5) C log^3(d) / d^(4/5); the pipeline's regime needs <= 1 but
  /// C is an unknown universal constant, so this is reported, not enforced.
  double regime_ratio = 0.0;
};

namespace detail {

// ceil that ignores representation noise around exact integers
// (pow(32, 0.8) is 16 in exact arithmetic).
inline std::size_t ceil_count(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v))) {
    return static_cast<std::size_t>(r);
  }
  return static_cast<std::size_t>(std::ceil(v));
}

}  // namespace detail

/// Warm-start schedule: N = ceil(d^(4/5) kappa^(16/5)) steps of size
/// h = (4/5) d^(-4/5) kappa^(-16/5) m^-1 log(d / kappa), started from
/// N(0, Id / (2L)).
inline CorollarySchedule corollary_schedule(std::size_t d, double m, double L,
                                            double C = 1.0) {
  if (d < 2) throw std::invalid_argument("corollary schedule needs d >= 2");
  if (!(m > 0.0) || !(L >= m)) throw std::invalid_argument("need 0 < m <= L");
  const double dd = static_cast<double>(d);
  const double kappa = L / m;
  const double lg = std::log(dd / kappa);
  if (!(lg > 0.0)) {
    throw std::domain_error("corollary schedule needs kappa < d (log(d/kappa) > 0)");
  }
  const double scale = std::pow(dd, 0.8) * std::pow(kappa, 3.2);
  CorollarySchedule out;
  out.kappa = kappa;
  out.schedule.n_steps = detail::ceil_count(scale);
  out.schedule.step_size = 0.8 / scale / m * lg;
  out.schedule.init_cov_scale = 1.0 / (2.0 * L);
  out.step_condition = out.schedule.step_size <= m / (4.0 * L * L);
  const double ld = std::log(dd);
  out.regime_ratio = std::pow(kappa, 1.8) * C * ld * ld * ld / std::pow(dd, 0.8);
  return out;
}

/// Zigzag ensemble whose initial points are first pushed through `warmstart`
/// LMC steps (when set), using the same per-trajectory stream.
template <Potential P>
SampleSet sample_with_warmstart(const P& p, const SamplerConfig& cfg,
                                const InitialDistribution& mu0,
                                const std::optional<LmcSchedule>& warmstart,
                                std::size_t n, std::size_t jobs = 1) {
  if (!warmstart) return sample(p, cfg, mu0, n, jobs);
  warmstart->validate();
  return run_ensemble(p, cfg, mu0, n, jobs,
                      [&](std::size_t, Rng& rng, Point& x) {
                        return run_lmc(p, *warmstart, x, rng);
                      });
}

struct HybridConfig {
  double epsilon = 0.1;
  double K = 1.0;
  std::uint64_t seed = 0;
  bool record_events = false;
  std::uint64_t max_events = 100'000'000;
  /// Replaces the corollary schedule when set.
  std::optional<LmcSchedule> schedule;
};

struct HybridResult {
  SampleSet samples;
  LmcSchedule schedule;
  double terminal_time = 0.0;
  /// N * d per chain, summed.
  std::uint64_t lmc_evals = 0;
  /// Proposed bounces, one partial derivative each.
  std::uint64_t zigzag_evals = 0;
};

/// LMC warm start from N(0, init_cov_scale Id) (1 / (2L) for the corollary
/// schedule) followed by zigzag up to the
/// pipeline's terminal time. Velocities for the zigzag phase are drawn fresh
/// from N(0, Id).
template <Potential P>
HybridResult hybrid_sample(const P& p, const HybridConfig& hc, std::size_t n,
                           std::size_t jobs = 1) {
  HybridResult out;
  out.schedule = hc.schedule ? *hc.schedule
                             : corollary_schedule(p.dim(), p.m(), p.L()).schedule;
  out.terminal_time =
      analytics::corollary_terminal_time(p.dim(), p.m(), p.L(), hc.epsilon, hc.K);

  SamplerConfig cfg;
  cfg.terminal_time = out.terminal_time;
  cfg.seed = hc.seed;
  cfg.record_events = hc.record_events;
  cfg.max_events = hc.max_events;

  const IsotropicGaussianInit mu0{{}, out.schedule.init_cov_scale};
  out.samples = sample_with_warmstart(p, cfg, mu0, out.schedule, n, jobs);
  out.lmc_evals = out.samples.warmstart_evals;
  out.zigzag_evals = out.samples.stats.n_partial_evals;
  return out;
}

}  // namespace zigzag
