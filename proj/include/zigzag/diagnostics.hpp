#pragma once

// Empirical checks over ensembles of zigzag runs. Every check produces a
// CheckReport whose pass flag is a pure function of the recorded statistics
// and their declared bands.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zigzag/analytics.hpp"
#include "zigzag/potentials.hpp"
#include "zigzag/random.hpp"
#include "zigzag/sampler.hpp"
#include "zigzag/statistics.hpp"

namespace zigzag::diagnostics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Statistic {
  std::string name;
  double observed = 0.0;
  /// Theoretical value or bound the observation is compared with.
  double target = 0.0;
  double lower = -kInf;
  double upper = kInf;
  std::optional<double> standard_error;
  bool pass = false;
};

struct CheckReport {
  std::string name;
  bool pass = false;
  std::size_t n_samples = 0;
  std::vector<Statistic> statistics;
  /// Sub-checks that could not be evaluated, and similar remarks.
  std::vector<std::string> notes;

  Statistic& add(std::string stat_name, double observed, double target,
                 double lower, double upper,
                 std::optional<double> standard_error = std::nullopt) {
    Statistic s{std::move(stat_name), observed, target, lower, upper,
                standard_error, false};
    s.pass = observed >= lower && observed <= upper;
    statistics.push_back(std::move(s));
    return statistics.back();
  }

  /// Informational statistic that always passes.
  Statistic& info(std::string stat_name, double observed, double target = 0.0) {
    return add(std::move(stat_name), observed, target, -kInf, kInf);
  }

  CheckReport& finalize() {
    pass = std::all_of(statistics.begin(), statistics.end(),
                       [](const Statistic& s) { return s.pass; });
    return *this;
  }

  const Statistic* find(const std::string& stat_name) const {
    for (const auto& s : statistics) {
      if (s.name == stat_name) return &s;
    }
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Warm start and concentration of the initial law.

/// eta = P_mu0(|x| > sqrt(2d/m)) estimated from n_draws, required < 1/4;
/// plus the warm-start ceiling chi2(mu0 || mu) <= exp(d / (8 K kappa log d))
/// whenever both laws are centred Gaussians.
template <Potential P>
CheckReport check_assumption2(const InitialDistribution& mu0, const P& p,
                              std::size_t n_draws, double K, std::uint64_t seed) {
  if (n_draws == 0) throw std::invalid_argument("n_draws must be > 0");
  CheckReport r;
  r.name = "assumption2";
  r.n_samples = n_draws;
  const std::size_t d = p.dim();
  const double radius = std::sqrt(2.0 * static_cast<double>(d) / p.m());

  Rng rng(seed);
  Point x(d);
  std::size_t outside = 0;
  for (std::size_t k = 0; k < n_draws; ++k) {
    draw_initial(mu0, p, k, rng, x);
    if (euclidean_norm(x) > radius) ++outside;
  }
  const double eta = static_cast<double>(outside) / static_cast<double>(n_draws);
  r.add("eta", eta, 0.25, 0.0, std::nextafter(0.25, 0.0));

  std::optional<double> chi2_0;
  if constexpr (GaussianPotential<P>) {
    std::vector<double> target_var(d);
    for (std::size_t i = 0; i < d; ++i) target_var[i] = 1.0 / p.precision(i);
    if (std::holds_alternative<TargetInit>(mu0)) {
      chi2_0 = 0.0;
    } else if (const auto* g = std::get_if<IsotropicGaussianInit>(&mu0)) {
      const bool centred = std::all_of(g->mean.begin(), g->mean.end(),
                                       [](double v) { return v == 0.0; });
      if (centred && g->variance > 0.0) {
        std::vector<double> init_var(d, g->variance);
        chi2_0 = analytics::gaussian_chi2(init_var, target_var);
      }
    }
  }

  if (!chi2_0) {
    r.notes.push_back("warm start: not evaluable (chi2(mu0 || mu) has no closed form here)");
  } else if (d < 2) {
    r.notes.push_back("warm start: not evaluable for d < 2");
  } else {
    const double kappa = p.L() / p.m();
    const double dd = static_cast<double>(d);
    const double ceiling = dd / (8.0 * K * kappa * std::log(dd));
    r.add("log_chi2_0", std::log(*chi2_0), ceiling, -kInf, ceiling);
  }
  return r.finalize();
}

// ---------------------------------------------------------------------------
// Supremum of the potential along trajectories.

struct DimensionEnsemble {
  std::size_t dim = 0;
  std::vector<RunStats> runs;
};

/// An upper bound of this form only requires C_d not to grow with d, so the band
/// Lemma-style upper bounds only require C_d not to grow with d, so the band
/// on the log C vs log d slope is (-inf, 0.15]. Also cross-checks the two
/// sup trackers: sup |X| <= sqrt(2 sup U / m) must hold for every run.
inline CheckReport check_sup_potential(std::span<const DimensionEnsemble> ensembles,
                                       double m, double L, double T) {
  CheckReport r;
  r.name = "sup_potential";
  std::vector<double> dims, consts;
  double worst_consistency = 0.0;
  for (const auto& e : ensembles) {
    if (e.runs.empty()) continue;
    double c_max = 0.0;
    for (const auto& s : e.runs) {
      const double denom = std::sqrt(L) * T * static_cast<double>(e.dim);
      if (denom > 0.0) c_max = std::max(c_max, s.sup_U / denom);
      const double bound = std::sqrt(2.0 * s.sup_U / m);
      if (bound > 0.0) worst_consistency = std::max(worst_consistency, s.sup_xnorm / bound);
      ++r.n_samples;
    }
    r.info("C[d=" + std::to_string(e.dim) + "]", c_max);
    dims.push_back(static_cast<double>(e.dim));
    consts.push_back(c_max);
  }
  r.add("xnorm_over_potential_bound", worst_consistency, 1.0, 0.0, 1.0 + 1e-9);
  if (dims.size() >= 2 && std::all_of(consts.begin(), consts.end(),
                                      [](double c) { return c > 0.0; })) {
    const auto fit = stats::loglog_fit(dims, consts);
    r.add("log_C_vs_log_d_slope", fit.slope, 0.0, -kInf, 0.15, fit.slope_standard_error);
  } else {
    r.notes.push_back("slope: needs >= 2 dimensions with T > 0");
  }
  return r.finalize();
}

/// Runs `runs` stationary trajectories of potential_for(d) at each d.
template <class Factory>
std::vector<DimensionEnsemble> collect_dimension_ensembles(
    Factory&& potential_for, std::span<const std::size_t> dims, std::size_t runs,
    const SamplerConfig& base, std::size_t jobs) {
  std::vector<DimensionEnsemble> out;
  for (std::size_t g = 0; g < dims.size(); ++g) {
    const auto p = potential_for(dims[g]);
    SamplerConfig cfg = base;
    cfg.seed = derive_seed(base.seed, g);
    cfg.record_events = false;
    auto set = sample(p, cfg, TargetInit{}, runs, jobs);
    out.push_back({dims[g], std::move(set.per_trajectory)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Squared inter-refresh durations.

struct RefreshSequence {
  std::size_t n_refreshments = 0;  // N, excluding the initial draw
  double xi = 0.0;
};

/// Gaps of a rate-`rate` Poisson process on [0, T], last gap truncated.
inline RefreshSequence simulate_refresh_sequence(double rate, double T, Rng& rng) {
  RefreshSequence out;
  double t = 0.0;
  for (;;) {
    const double gap = rng.exponential(rate);
    if (!(gap < T - t)) {
      out.xi += (T - t) * (T - t);
      return out;
    }
    out.xi += gap * gap;
    t += gap;
    ++out.n_refreshments;
  }
}

/// Tail frequency of Xi >= 4T / sqrt(L) against 2 / (sqrt(L) T) plus three
/// binomial standard errors, and the sample mean of Xi against the exact
/// E Xi within three standard errors. Needs sqrt(L) T >= 10.
inline CheckReport check_xi_tail(std::size_t n_runs, double L, double T,
                                 std::uint64_t seed) {
  if (n_runs < 2) throw std::invalid_argument("n_runs must be >= 2");
  if (!(L > 0.0) || !(T > 0.0)) throw std::invalid_argument("need L > 0, T > 0");
  if (std::sqrt(L) * T < 10.0) {
    throw std::invalid_argument("xi tail check needs sqrt(L) T >= 10");
  }
  const auto mom = analytics::xi_moments(L, T);
  Rng rng(seed);
  std::vector<double> xis(n_runs);
  std::size_t exceed = 0;
  for (auto& xi : xis) {
    xi = simulate_refresh_sequence(std::sqrt(L), T, rng).xi;
    if (xi >= mom.tail_threshold) ++exceed;
  }
  const double n = static_cast<double>(n_runs);
  const double freq = static_cast<double>(exceed) / n;
  const double b = mom.tail_probability_bound;
  const double se_tail = std::sqrt(std::min(b, 1.0) * (1.0 - std::min(b, 1.0)) / n);

  CheckReport r;
  r.name = "xi_tail";
  r.n_samples = n_runs;
  r.add("tail_frequency", freq, b, 0.0, b + 3.0 * se_tail, se_tail);
  const auto mv = stats::mean_var(xis);
  const double se = mv.standard_error();
  r.add("mean_xi", mv.mean, mom.mean, mom.mean - 3.0 * se, mom.mean + 3.0 * se, se);
  r.info("tail_threshold", mom.tail_threshold);
  return r.finalize();
}

// ---------------------------------------------------------------------------
// Concentration of partial derivatives under the target.

/// Worst per-coordinate frequency of |d_i U| >= 2 sqrt(L) + 2 c sqrt(L) log d
/// over the given target draws, against 3 d^-c plus three standard errors.
template <Potential P>
CheckReport check_partial_derivative_concentration(const P& p,
                                                   std::span<const Point> draws,
                                                   double c) {
  if (draws.empty()) throw std::invalid_argument("need target draws");
  const std::size_t d = p.dim();
  const auto bound = analytics::lemma5_tail_bound(p.L(), d, c);
  std::vector<std::size_t> exceed(d, 0);
  for (const auto& x : draws) {
    for (std::size_t i = 0; i < d; ++i) {
      if (std::abs(p.partial(x, i)) >= bound.threshold) ++exceed[i];
    }
  }
  const double n = static_cast<double>(draws.size());
  const double b = std::min(bound.probability_bound, 1.0);
  const double se = std::sqrt(b * (1.0 - b) / n);
  const double worst =
      static_cast<double>(*std::max_element(exceed.begin(), exceed.end())) / n;

  CheckReport r;
  r.name = "partial_derivative_concentration";
  r.n_samples = draws.size();
  r.add("max_tail_frequency", worst, bound.probability_bound, 0.0,
        bound.probability_bound + 3.0 * se, se);
  r.info("threshold", bound.threshold);
  return r.finalize();
}

/// Same check with exact draws from a Gaussian target.
template <GaussianPotential P>
CheckReport check_partial_derivative_concentration(const P& p, std::size_t n_draws,
                                                   double c, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> draws(n_draws, Point(p.dim()));
  for (auto& x : draws) sample_target(p, rng, x);
  return check_partial_derivative_concentration(p, draws, c);
}

// ---------------------------------------------------------------------------
// Complexity scaling of proposed events.

struct ScalingPoint {
  double parameter = 0.0;  // d or T
  double mean_proposed = 0.0;
  double mean_ratio = 0.0;
  std::uint64_t total_proposed = 0;
  std::uint64_t total_accepted = 0;
  double total_ratio = 0.0;
  bool accounting_ok = true;
};

/// Mean proposed events of `runs` stationary trajectories.
template <Potential P>
ScalingPoint measure_scaling_point(const P& p, double parameter, std::size_t runs,
                                   const SamplerConfig& cfg, std::size_t jobs) {
  auto set = sample(p, cfg, TargetInit{}, runs, jobs);
  ScalingPoint pt;
  pt.parameter = parameter;
  double ratio_sum = 0.0;
  for (const auto& s : set.per_trajectory) {
    pt.total_proposed += s.n_proposed;
    pt.total_accepted += s.n_accepted;
    pt.total_ratio += s.sum_ratio;
    ratio_sum += s.mean_ratio();
    pt.accounting_ok = pt.accounting_ok && s.n_partial_evals == s.n_proposed &&
                       s.n_accepted <= s.n_proposed;
  }
  pt.mean_proposed = static_cast<double>(pt.total_proposed) / static_cast<double>(runs);
  pt.mean_ratio = ratio_sum / static_cast<double>(runs);
  return pt;
}

struct ScalingConfig {
  std::vector<std::size_t> dims{8, 16, 32, 64, 128};
  std::vector<double> times{5.0, 10.0, 20.0, 40.0};
  std::size_t fixed_dim = 16;
  double terminal_time = 10.0;
  std::size_t runs = 20;
  std::uint64_t seed = 0;
  /// Theory exponent bands.
  double dim_lo = 1.35, dim_hi = 1.65;
  double time_lo = 1.3, time_hi = 1.7;
  double ratio_lo = -0.65, ratio_hi = -0.35;
};

struct ScalingScan {
  std::vector<ScalingPoint> points;
  stats::LinearFit events_fit;
  stats::LinearFit ratio_fit;
};

/// Proposed-event counts over a d-grid at fixed T.
template <class Factory>
ScalingScan scan_dimension(Factory&& potential_for, const ScalingConfig& sc,
                           std::size_t jobs) {
  if (sc.dims.size() < 2) throw std::invalid_argument("dimension grid needs >= 2 points");
  ScalingScan scan;
  for (std::size_t g = 0; g < sc.dims.size(); ++g) {
    SamplerConfig cfg;
    cfg.terminal_time = sc.terminal_time;
    cfg.seed = derive_seed(derive_seed(sc.seed, 0), g);
    scan.points.push_back(measure_scaling_point(potential_for(sc.dims[g]),
                                                static_cast<double>(sc.dims[g]),
                                                sc.runs, cfg, jobs));
  }
  std::vector<double> x, y, r;
  for (const auto& pt : scan.points) {
    x.push_back(pt.parameter);
    y.push_back(pt.mean_proposed);
    r.push_back(pt.mean_ratio);
  }
  scan.events_fit = stats::loglog_fit(x, y);
  scan.ratio_fit = stats::loglog_fit(x, r);
  return scan;
}

/// Proposed-event counts over a T-grid at fixed d.
template <class Factory>
ScalingScan scan_time(Factory&& potential_for, const ScalingConfig& sc,
                      std::size_t jobs) {
  if (sc.times.size() < 2) throw std::invalid_argument("time grid needs >= 2 points");
  ScalingScan scan;
  const auto p = potential_for(sc.fixed_dim);
  for (std::size_t g = 0; g < sc.times.size(); ++g) {
    SamplerConfig cfg;
    cfg.terminal_time = sc.times[g];
    cfg.seed = derive_seed(derive_seed(sc.seed, 1), g);
    scan.points.push_back(measure_scaling_point(p, sc.times[g], sc.runs, cfg, jobs));
  }
  std::vector<double> x, y, r;
  for (const auto& pt : scan.points) {
    x.push_back(pt.parameter);
    y.push_back(pt.mean_proposed);
    r.push_back(pt.mean_ratio);
  }
  scan.events_fit = stats::loglog_fit(x, y);
  scan.ratio_fit = stats::loglog_fit(x, r);
  return scan;
}

/// Exponents of mean proposed events in d (fixed T) and in T (fixed d),
/// against 3/2 for both, plus the mean acceptance-ratio exponent in d
/// (expected -1/2) and per-run counter accounting.
template <class Factory>
CheckReport check_event_scaling(Factory&& potential_for, const ScalingConfig& sc,
                                std::size_t jobs) {
  if (sc.dims.size() < 4) throw std::invalid_argument("dimension grid needs >= 4 points");
  const auto [dmin, dmax] = std::minmax_element(sc.dims.begin(), sc.dims.end());
  if (*dmax < 8 * *dmin) {
    throw std::invalid_argument("dimension grid must span a factor of >= 8");
  }
  const auto dscan = scan_dimension(potential_for, sc, jobs);
  const auto tscan = scan_time(potential_for, sc, jobs);

  CheckReport r;
  r.name = "event_scaling";
  r.add("dim_exponent", dscan.events_fit.slope, 1.5, sc.dim_lo, sc.dim_hi,
        dscan.events_fit.slope_standard_error);
  r.add("time_exponent", tscan.events_fit.slope, 1.5, sc.time_lo, sc.time_hi,
        tscan.events_fit.slope_standard_error);
  r.add("acceptance_ratio_dim_exponent", dscan.ratio_fit.slope, -0.5, sc.ratio_lo,
        sc.ratio_hi, dscan.ratio_fit.slope_standard_error);

  // Accepted bounces are Bernoulli(ratio) given the proposals, so the pooled
  // count must sit within a few binomial deviations of the summed ratios.
  bool counters_ok = true;
  double worst_z = 0.0;
  for (const auto* scan : {&dscan, &tscan}) {
    for (const auto& pt : scan->points) {
      counters_ok = counters_ok && pt.accounting_ok;
      const double sd = std::sqrt(std::max(pt.total_ratio, 1.0));
      worst_z = std::max(worst_z,
                         std::abs(static_cast<double>(pt.total_accepted) - pt.total_ratio) / sd);
      r.n_samples += sc.runs;
    }
  }
  r.add("counter_accounting", counters_ok ? 1.0 : 0.0, 1.0, 1.0, 1.0);
  r.add("accepted_vs_summed_ratio_z", worst_z, 0.0, 0.0, 4.0);
  for (const auto& pt : dscan.points) {
    r.info("mean_proposed[d=" + std::to_string(static_cast<std::size_t>(pt.parameter)) + "]",
           pt.mean_proposed);
  }
  for (const auto& pt : tscan.points) {
    r.info("mean_proposed[T=" + std::to_string(pt.parameter) + "]", pt.mean_proposed);
  }
  return r.finalize();
}

// ---------------------------------------------------------------------------
// Invariance of the target under the sampler.

/// Moment and KS tests of final positions/velocities against mu x N(0, Id).
///
/// Statistics: mean[i] within 3 SE of 0; variance[i] within 3 SE of 1/a_i
/// (SE = (1/a_i) sqrt(2/(n-1))); ks[i] p-value >= 0.01 on three coordinates
/// chosen with `ks_seed`; velocity_variance[i] within 3 SE of 1; and the
/// largest standardised cross-covariance, whose band is Bonferroni-adjusted
/// over the d(d-1)/2 pairs to the same 0.27% family-wise level as a single
/// 3-SE test.
template <GaussianPotential P>
CheckReport stationarity_report(const P& p, std::span<const Point> positions,
                                std::span<const Point> velocities,
                                std::uint64_t ks_seed) {
  const std::size_t n = positions.size();
  if (n < 2) throw std::invalid_argument("stationarity needs >= 2 samples");
  const std::size_t d = p.dim();
  const double nn = static_cast<double>(n);

  CheckReport r;
  r.name = "stationarity";
  r.n_samples = n;

  std::vector<std::vector<double>> cols(d, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < d; ++i) cols[i][k] = positions[k][i];
  }
  std::vector<stats::MeanVar> mv(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double var = 1.0 / p.precision(i);
    mv[i] = stats::mean_var(cols[i]);
    const double se_mean = std::sqrt(var / nn);
    const double se_var = var * std::sqrt(2.0 / (nn - 1.0));
    const std::string tag = "[x" + std::to_string(i) + "]";
    r.add("mean" + tag, mv[i].mean, 0.0, -3.0 * se_mean, 3.0 * se_mean, se_mean);
    r.add("variance" + tag, mv[i].variance, var, var - 3.0 * se_var,
          var + 3.0 * se_var, se_var);
  }

  if (d >= 2) {
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) {
        double cov = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          cov += (cols[i][k] - mv[i].mean) * (cols[j][k] - mv[j].mean);
        }
        cov /= nn - 1.0;
        const double se = std::sqrt(1.0 / (p.precision(i) * p.precision(j) * nn));
        worst = std::max(worst, std::abs(cov) / se);
      }
    }
    const double pairs = static_cast<double>(d * (d - 1) / 2);
    // two-sided normal quantile at level 0.0027 / pairs, by bisection
    const double tail = 0.0027 / pairs / 2.0;
    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (stats::normal_sf(mid) > tail ? lo : hi) = mid;
    }
    r.add("cross_covariance_max_z", worst, 0.0, 0.0, hi);
  }

  Rng pick(ks_seed);
  std::vector<std::size_t> coords(d);
  std::iota(coords.begin(), coords.end(), 0);
  const std::size_t n_ks = std::min<std::size_t>(3, d);
  for (std::size_t s = 0; s < n_ks; ++s) {
    const std::size_t j = s + static_cast<std::size_t>(pick.uniform() * static_cast<double>(d - s));
    std::swap(coords[s], coords[std::min(j, d - 1)]);
  }
  std::sort(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(n_ks));
  for (std::size_t s = 0; s < n_ks; ++s) {
    const std::size_t i = coords[s];
    const double sd = 1.0 / std::sqrt(p.precision(i));
    const auto ks = stats::ks_test(cols[i], [sd](double v) { return stats::normal_cdf(v / sd); });
    r.add("ks[x" + std::to_string(i) + "]", ks.p_value, 0.01, 0.01, 1.0);
  }

  if (!velocities.empty()) {
    const double se_var = std::sqrt(2.0 / (nn - 1.0));
    std::vector<double> col(n);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < n; ++k) col[k] = velocities[k][i];
      const auto v = stats::mean_var(col);
      r.add("velocity_variance[v" + std::to_string(i) + "]", v.variance, 1.0,
            1.0 - 3.0 * se_var, 1.0 + 3.0 * se_var, se_var);
    }
  }
  return r.finalize();
}

/// Initialises n_samples trajectories from mu x N(0, Id), runs them to
/// cfg.terminal_time and tests the final law.
template <GaussianPotential P>
CheckReport check_stationarity(const P& p, const SamplerConfig& cfg,
                               std::size_t n_samples, std::size_t jobs = 1) {
  const auto set = sample(p, cfg, TargetInit{}, n_samples, jobs);
  return stationarity_report(p, set.positions, set.velocities,
                             derive_seed(cfg.seed, 0xC0FFEEULL));
}

/// Statistics of a stationarity report restricted to the position mean,
/// variance and KS tests.
inline bool position_moments_pass(const CheckReport& r) {
  for (const auto& s : r.statistics) {
    const bool relevant = s.name.rfind("mean[", 0) == 0 ||
                          s.name.rfind("variance[", 0) == 0 ||
                          s.name.rfind("ks[", 0) == 0;
    if (relevant && !s.pass) return false;
  }
  return true;
}

}  // namespace zigzag::diagnostics
