#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zigzag/parallel.hpp"
#include "zigzag/potentials.hpp"
#include "zigzag/random.hpp"

namespace zigzag {

/// Thrown when a proposal's true rate exceeds its dominating bound, which
/// means the oracle's true smoothness exceeds its declared L.
class ThinningViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MaxEventsExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateVelocity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relative slack in the lambda_j <= Lambda_j soundness check. When the bound
/// is tight (x parallel to e_j, v = e_j) both sides agree exactly in real
/// arithmetic and may differ by a few ulps in floating point.
inline constexpr double kThinningRelTol = 1e-10;

enum class EventKind { refresh, proposed_bounce, accepted_bounce, terminal };

inline std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::refresh: return "refresh";
    case EventKind::proposed_bounce: return "proposed_bounce";
    case EventKind::accepted_bounce: return "accepted_bounce";
    case EventKind::terminal: return "terminal";
  }
  return "unknown";
}

inline std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::refresh, EventKind::proposed_bounce,
                 EventKind::accepted_bounce, EventKind::terminal}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

/// One logged event. A proposal is logged once, as `accepted_bounce` if the
/// thinning test flipped the velocity and `proposed_bounce` otherwise; the
/// ratio lambda_j / Lambda_j is present exactly for those two kinds.
struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::refresh;
  std::optional<std::size_t> coordinate;
  std::optional<double> thinning_ratio;
  double position_norm = 0.0;

  bool operator==(const EventRecord&) const = default;
};

struct SamplerConfig {
  double terminal_time = 1.0;
  /// Refreshment rate; sqrt(L) when unset. Zero disables refreshment (only
  /// the initial velocity draw happens), which is outside the analysed regime.
  std::optional<double> refresh_rate;
  std::uint64_t seed = 0;
  bool record_events = false;
  std::uint64_t max_events = 100'000'000;

  double refresh_rate_for(double L) const {
    return refresh_rate.value_or(std::sqrt(L));
  }

  void validate() const {
    if (!(terminal_time >= 0.0) || !std::isfinite(terminal_time)) {
      throw std::invalid_argument("terminal time must be finite and >= 0");
    }
    if (refresh_rate && !(*refresh_rate >= 0.0)) {
      throw std::invalid_argument("refresh rate must be >= 0");
    }
    if (max_events == 0) throw std::invalid_argument("max_events must be > 0");
  }
};

/// Counters and trackers of one trajectory, or of an ensemble after merge().
struct RunStats {
  std::uint64_t n_trajectories = 0;
  /// Velocity draws including the initial one (N + 1 per trajectory).
  std::uint64_t n_refresh = 0;
  std::uint64_t n_proposed = 0;
  std::uint64_t n_accepted = 0;
  std::uint64_t n_partial_evals = 0;
  /// Exponential clock draws, d per proposal loop. Not part of the
  /// partial-derivative cost model; reported so both costs are visible.
  std::uint64_t n_clock_draws = 0;
  /// max of U(X_t) over t in [0, T]. U is convex along each linear segment,
  /// so segment endpoints suffice.
  double sup_U = 0.0;
  double sup_xnorm = 0.0;
  /// Sum of squared inter-refresh durations, last one truncated at T.
  double xi = 0.0;
  /// Sum and max of lambda_j / Lambda_j over proposals.
  double sum_ratio = 0.0;
  double max_ratio = 0.0;

  double mean_ratio() const {
    return n_proposed ? sum_ratio / static_cast<double>(n_proposed) : 0.0;
  }

  void merge(const RunStats& o) {
    n_trajectories += o.n_trajectories;
    n_refresh += o.n_refresh;
    n_proposed += o.n_proposed;
    n_accepted += o.n_accepted;
    n_partial_evals += o.n_partial_evals;
    n_clock_draws += o.n_clock_draws;
    sup_U = std::max(sup_U, o.sup_U);
    sup_xnorm = std::max(sup_xnorm, o.sup_xnorm);
    xi += o.xi;
    sum_ratio += o.sum_ratio;
    max_ratio = std::max(max_ratio, o.max_ratio);
  }
};

/// Full simulation state between events.
struct ZigzagState {
  Point x;
  Point v;
  double t = 0.0;
  /// Residual time until the next refreshment, already truncated at T - t.
  double t_refr = 0.0;
  bool refr_pending = true;
};

inline double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double xi : x) s += xi * xi;
  return std::sqrt(s);
}

namespace detail {

// Solves A tau + B tau^2 / 2 = E in the cancellation-free form; covers
// B = 0 (E / A) and A = 0 (sqrt(2E / B)) without branching.
inline double clock_time(double A, double B, double E) {
  const double denom = A + std::sqrt(A * A + 2.0 * B * E);
  return denom > 0.0 ? 2.0 * E / denom
                     : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// First arrival time of a Poisson clock with hazard A + B s, obtained by
/// inverting the survival exp(-A s - B s^2 / 2) at a standard exponential
/// draw E. Returns +inf when A = B = 0.
inline double sample_clock(double A, double B, double E) {
  if (!(A >= 0.0) || !(B >= 0.0) || !(E > 0.0)) {
    throw std::invalid_argument("sample_clock requires A >= 0, B >= 0, E > 0");
  }
  return detail::clock_time(A, B, E);
}

struct BounceProposal {
  std::size_t coordinate = 0;
  double time = 0.0;
  /// Lambda_j = L |v_j| (|x| + tau_j |v|), evaluated with the pre-move |x|.
  double bound_rate = 0.0;
};

/// Draws one clock per coordinate with hazard L |v_i| (|x| + s |v|) and
/// returns the earliest (lowest index on ties).
inline BounceProposal propose_next_bounce(std::span<const double> v,
                                          double x_norm, double v_norm,
                                          double L, Rng& rng) {
  BounceProposal best;
  best.time = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = L * std::abs(v[i]);
    const double tau = detail::clock_time(w * x_norm, w * v_norm, rng.exponential());
    if (tau < best.time) {
      best.time = tau;
      best.coordinate = i;
    }
  }
  if (!std::isfinite(best.time)) {
    throw DegenerateVelocity("all bounce clocks are infinite (zero velocity)");
  }
  best.bound_rate =
      L * std::abs(v[best.coordinate]) * (x_norm + best.time * v_norm);
  return best;
}

inline BounceProposal propose_next_bounce(const ZigzagState& state, double L,
                                          Rng& rng) {
  return propose_next_bounce(state.v, euclidean_norm(state.x),
                             euclidean_norm(state.v), L, rng);
}

struct ThinningOutcome {
  bool accepted = false;
  /// True rate (v_j d_j U(x_new))_+ at the post-move position.
  double rate = 0.0;
  /// rate / Lambda_j, clamped to at most 1.
  double ratio = 0.0;
};

/// Thinning step: one partial-derivative evaluation at the post-move
/// position, then accept with probability lambda_j / Lambda_j.
template <Potential P>
ThinningOutcome thinning_accept(std::span<const double> x_new,
                                std::span<const double> v, std::size_t j,
                                double bound_rate, CountingOracle<P>& oracle,
                                Rng& rng) {
  if (!(bound_rate > 0.0)) {
    throw std::invalid_argument("thinning bound rate must be positive");
  }
  ThinningOutcome out;
  out.rate = std::max(0.0, v[j] * oracle.partial(x_new, j));
  if (out.rate > bound_rate * (1.0 + kThinningRelTol)) {
    throw ThinningViolation(
        "thinning violation at coordinate " + std::to_string(j) + ": rate " +
        std::to_string(out.rate) + " exceeds bound " +
        std::to_string(bound_rate) + " (declared L too small?)");
  }
  out.ratio = std::min(1.0, out.rate / bound_rate);
  const double alpha = rng.uniform();
  out.accepted = alpha < out.rate / bound_rate;
  return out;
}

struct TrajectoryResult {
  Point x;
  Point v;
  RunStats stats;
  std::vector<EventRecord> events;
};

/// Maximum of U on the segment {x0 + s v : s in [0, len]}.
///
/// Locates the zero of the directional derivative s -> v . grad U(x0 + s v)
/// by bisection (at most 40 iterations, tolerance 1e-10 in s) and compares U
/// there with both endpoints. For convex U the interior critical point is a
/// minimum, so the result always equals the endpoint maximum; this exists to
/// check that claim, the sampler itself tracks endpoints only.
template <Potential P>
double segment_sup_potential(const P& p, std::span<const double> x0,
                             std::span<const double> v, double len) {
  const std::size_t d = p.dim();
  Point y(d);
  auto at = [&](double s) {
    for (std::size_t i = 0; i < d; ++i) y[i] = x0[i] + s * v[i];
  };
  auto slope = [&](double s) {
    at(s);
    double g = 0.0;
    for (std::size_t i = 0; i < d; ++i) g += v[i] * p.partial(y, i);
    return g;
  };
  at(0.0);
  double best = p.value(y);
  at(len);
  best = std::max(best, p.value(y));

  double lo = 0.0, hi = len;
  double g_lo = slope(lo), g_hi = slope(hi);
  if ((g_lo < 0.0) != (g_hi < 0.0)) {
    for (int it = 0; it < 40 && hi - lo > 1e-10; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double g = slope(mid);
      if ((g < 0.0) == (g_lo < 0.0)) {
        lo = mid;
        g_lo = g;
      } else {
        hi = mid;
      }
    }
    at(0.5 * (lo + hi));
    best = std::max(best, p.value(y));
  }
  return best;
}

/// Simulates one zigzag trajectory on [0, T] from init_x.
///
/// The velocity is drawn from N(0, Id) at t = 0 and at every refreshment.
/// The refresh clock is Exp(lambda) truncated at T - t; when the truncated
/// clock fires the trajectory ends at exactly t = T.
template <Potential P>
TrajectoryResult run_trajectory(const P& p, const SamplerConfig& cfg,
                                std::span<const double> init_x, Rng& rng) {
  cfg.validate();
  detail::check_dim(init_x, p.dim());
  for (double xi : init_x) {
    if (!std::isfinite(xi)) throw std::invalid_argument("initial point not finite");
  }

  const std::size_t d = p.dim();
  const double L = p.L();
  const double lambda = cfg.refresh_rate_for(L);
  const double T = cfg.terminal_time;

  CountingOracle<P> oracle(p);
  TrajectoryResult out;
  RunStats& st = out.stats;
  st.n_trajectories = 1;

  ZigzagState s;
  s.x.assign(init_x.begin(), init_x.end());
  s.v.assign(d, 0.0);

  double x_norm = euclidean_norm(s.x);
  double v_norm = 0.0;
  bool truncated = false;
  double segment_start = 0.0;
  st.sup_U = p.value(s.x);
  st.sup_xnorm = x_norm;

  auto log = [&](EventKind kind, std::optional<std::size_t> j,
                 std::optional<double> ratio) {
    if (cfg.record_events) out.events.push_back({s.t, kind, j, ratio, x_norm});
  };

  auto refresh = [&] {
    for (auto& vi : s.v) vi = rng.normal();
    v_norm = euclidean_norm(s.v);
    s.t_refr = rng.exponential(lambda);
    truncated = !(s.t_refr < T - s.t);
    if (truncated) s.t_refr = T - s.t;
    s.refr_pending = false;
    segment_start = s.t;
    ++st.n_refresh;
    log(EventKind::refresh, std::nullopt, std::nullopt);
  };

  refresh();
  while (s.t < T) {
    if (s.refr_pending) refresh();
    if (st.n_proposed + st.n_refresh > cfg.max_events) {
      throw MaxEventsExceeded("trajectory exceeded max_events = " +
                              std::to_string(cfg.max_events));
    }

    const BounceProposal prop = propose_next_bounce(s.v, x_norm, v_norm, L, rng);
    st.n_clock_draws += d;

#ifndef NDEBUG
    const Point x_prev = s.x;
    const Point v_prev = s.v;
    const double u_prev = p.value(s.x);
    const double seg_len = std::min(prop.time, s.t_refr);
#endif
    if (prop.time < s.t_refr) {
      s.t += prop.time;
      for (std::size_t i = 0; i < d; ++i) s.x[i] += s.v[i] * prop.time;
      x_norm = euclidean_norm(s.x);

      const ThinningOutcome th = thinning_accept(s.x, s.v, prop.coordinate,
                                                 prop.bound_rate, oracle, rng);
      ++st.n_proposed;
      st.sum_ratio += th.ratio;
      st.max_ratio = std::max(st.max_ratio, th.ratio);
      if (th.accepted) {
        s.v[prop.coordinate] = -s.v[prop.coordinate];
        ++st.n_accepted;
      }
      s.t_refr -= prop.time;
      log(th.accepted ? EventKind::accepted_bounce : EventKind::proposed_bounce,
          prop.coordinate, th.ratio);
    } else {
      for (std::size_t i = 0; i < d; ++i) s.x[i] += s.v[i] * s.t_refr;
      s.t = truncated ? T : s.t + s.t_refr;
      x_norm = euclidean_norm(s.x);
      st.xi += (s.t - segment_start) * (s.t - segment_start);
      s.refr_pending = true;
    }

    const double u_now = p.value(s.x);
#ifndef NDEBUG
    {
      const double seg_sup = segment_sup_potential(p, x_prev, v_prev, seg_len);
      const double end_sup = std::max(u_prev, u_now);
      assert(seg_sup <= end_sup + 1e-9 * std::max(1.0, end_sup));
    }
#endif
    st.sup_U = std::max(st.sup_U, u_now);
    st.sup_xnorm = std::max(st.sup_xnorm, x_norm);
  }
  log(EventKind::terminal, std::nullopt, std::nullopt);

  st.n_partial_evals = oracle.eval_count();
  out.x = std::move(s.x);
  out.v = std::move(s.v);
  return out;
}

// Initial distributions for x. Velocities always start from N(0, Id).

struct PointMass {
  Point x;
};

/// N(mean, variance * Id); an empty mean means the origin.
struct IsotropicGaussianInit {
  Point mean;
  double variance = 1.0;
};

/// Trajectory k starts from draws[k].
struct ExternalDraws {
  std::vector<Point> draws;
};

/// Exact draw from the target (Gaussian potentials only).
struct TargetInit {};

using InitialDistribution =
    std::variant<PointMass, IsotropicGaussianInit, ExternalDraws, TargetInit>;

template <Potential P>
void draw_initial(const InitialDistribution& mu0, const P& p, std::size_t k,
                  Rng& rng, std::span<double> out) {
  const std::size_t d = p.dim();
  detail::check_dim(out, d);
  if (const auto* pm = std::get_if<PointMass>(&mu0)) {
    if (pm->x.empty()) {
      std::fill(out.begin(), out.end(), 0.0);
    } else {
      detail::check_dim(pm->x, d);
      std::copy(pm->x.begin(), pm->x.end(), out.begin());
    }
  } else if (const auto* g = std::get_if<IsotropicGaussianInit>(&mu0)) {
    if (!(g->variance >= 0.0)) throw std::invalid_argument("negative variance");
    if (!g->mean.empty()) detail::check_dim(g->mean, d);
    const double sd = std::sqrt(g->variance);
    for (std::size_t i = 0; i < d; ++i) {
      out[i] = (g->mean.empty() ? 0.0 : g->mean[i]) + sd * rng.normal();
    }
  } else if (const auto* ext = std::get_if<ExternalDraws>(&mu0)) {
    if (k >= ext->draws.size()) {
      throw std::invalid_argument("not enough external initial draws");
    }
    detail::check_dim(ext->draws[k], d);
    std::copy(ext->draws[k].begin(), ext->draws[k].end(), out.begin());
  } else {
    if constexpr (GaussianPotential<P>) {
      sample_target(p, rng, out);
    } else {
      throw std::invalid_argument(
          "exact target initialisation needs a Gaussian potential");
    }
  }
}

struct SampleSet {
  std::vector<Point> positions;
  std::vector<Point> velocities;
  std::vector<RunStats> per_trajectory;
  std::vector<std::vector<EventRecord>> events;
  /// Merged over all trajectories.
  RunStats stats;
  /// Partial-derivative-equivalent evaluations spent before the zigzag phase
  /// (LMC warm start), summed over trajectories.
  std::uint64_t warmstart_evals = 0;
};

/// Runs n independent trajectories; trajectory k draws from the stream
/// derive_seed(cfg.seed, k). `prepare(k, rng, x)` may transform the initial
/// point in place before the zigzag phase and returns the number of
/// partial-derivative evaluations it spent. Output is independent of `jobs`.
template <Potential P, class Prepare>
SampleSet run_ensemble(const P& p, const SamplerConfig& cfg,
                       const InitialDistribution& mu0, std::size_t n,
                       std::size_t jobs, Prepare&& prepare) {
  cfg.validate();
  SampleSet set;
  set.positions.resize(n);
  set.velocities.resize(n);
  set.per_trajectory.resize(n);
  if (cfg.record_events) set.events.resize(n);
  std::vector<std::uint64_t> extra(n, 0);

  parallel_for(n, jobs, [&](std::size_t k) {
    Rng rng(derive_seed(cfg.seed, k));
    Point x0(p.dim());
    draw_initial(mu0, p, k, rng, x0);
    extra[k] = prepare(k, rng, x0);
    TrajectoryResult r = run_trajectory(p, cfg, x0, rng);
    set.positions[k] = std::move(r.x);
    set.velocities[k] = std::move(r.v);
    set.per_trajectory[k] = r.stats;
    if (cfg.record_events) set.events[k] = std::move(r.events);
  });

  for (std::size_t k = 0; k < n; ++k) {
    set.stats.merge(set.per_trajectory[k]);
    set.warmstart_evals += extra[k];
  }
  return set;
}

/// n independent zigzag samples with (X0, V0) ~ mu0 x N(0, Id).
template <Potential P>
SampleSet sample(const P& p, const SamplerConfig& cfg,
                 const InitialDistribution& mu0, std::size_t n,
                 std::size_t jobs = 1) {
  return run_ensemble(p, cfg, mu0, n, jobs,
                      [](std::size_t, Rng&, Point&) -> std::uint64_t { return 0; });
}

}  // namespace zigzag
