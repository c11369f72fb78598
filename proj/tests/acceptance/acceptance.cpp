// Acceptance harness. Prints one PASS/FAIL line per criterion; exits non-zero
// if any selected criterion fails. `--criterion N` runs a single one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "oracles.hpp"
#include "zigzag/cli.hpp"
#include "zigzag/zigzag.hpp"

using namespace zigzag;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20261015;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::uint64_t seed_for(int criterion) { return derive_seed(kSeed, criterion); }

// 1. no thinning violation over >= 1e6 proposals on all three families
Outcome thinning_soundness() {
  std::uint64_t proposals = 0, violations = 0;
  double worst = 0.0;
  std::uint64_t round = 0;
  auto run = [&](const auto& p, double T, std::size_t n) {
    SamplerConfig cfg;
    cfg.terminal_time = T;
    cfg.seed = derive_seed(seed_for(1), round++);
    try {
      const auto set = sample(p, cfg, TargetInit{}, n);
      proposals += set.stats.n_proposed;
      worst = std::max(worst, set.stats.max_ratio);
      for (const auto& s : set.per_trajectory) {
        if (s.max_ratio > 1.0) ++violations;
      }
    } catch (const ThinningViolation&) {
      ++violations;
    }
  };
  auto run_point = [&](const auto& p, const Point& x0, double T, std::size_t n) {
    SamplerConfig cfg;
    cfg.terminal_time = T;
    cfg.seed = derive_seed(seed_for(1), round++);
    try {
      const auto set = sample(p, cfg, PointMass{x0}, n);
      proposals += set.stats.n_proposed;
      worst = std::max(worst, set.stats.max_ratio);
    } catch (const ThinningViolation&) {
      ++violations;
    }
  };
  std::vector<double> prec(20);
  for (std::size_t i = 0; i < prec.size(); ++i) prec[i] = 0.1 + 0.2 * static_cast<double>(i);
  std::uint64_t per_family_min = ~0ULL;
  for (int family = 0; family < 3; ++family) {
    const std::uint64_t before = proposals;
    while (proposals - before < 400'000) {
      if (family == 0) {
        run(IsotropicGaussianPotential(32, 1.0), 10.0, 20);
        run_point(IsotropicGaussianPotential(8, 2.0), Point(8, 5.0), 10.0, 20);
      } else if (family == 1) {
        run(DiagonalGaussianPotential(prec), 10.0, 20);
        run_point(DiagonalGaussianPotential({0.5, 4.0}), Point{10.0, -10.0}, 20.0, 50);
      } else {
        // no exact target sampler: start from a spread of points instead
        run_point(SoftenedQuadraticPotential(16, 1.0, 2.0), Point(16, 0.0), 10.0, 20);
        run_point(SoftenedQuadraticPotential(4, 0.5, 5.0), Point{3.0, -3.0, 1.0, 0.0},
                  10.0, 50);
      }
    }
    per_family_min = std::min(per_family_min, proposals - before);
  }
  return {violations == 0 && proposals >= 1'000'000,
          fmt::format("proposals={} (min per family {}), violations={}, max ratio={:.6f}",
                      proposals, per_family_min, violations, worst)};
}

// 2. clock inversion against exp(-A s - B s^2 / 2) within DKW bands
Outcome clock_inversion() {
  const std::size_t n = 100'000;
  const double eps = stats::dkw_epsilon(n, 0.01);
  const std::vector<std::pair<double, double>> cases{{1, 0}, {0, 1}, {1, 2}, {5, 0.1}};
  Rng rng(seed_for(2));
  bool ok = true;
  std::string detail;
  for (const auto& [A, B] : cases) {
    std::vector<double> s(n);
    for (auto& v : s) v = sample_clock(A, B, rng.exponential());
    const double D = stats::ecdf_sup_distance(
        s, [A = A, B = B](double t) { return -std::expm1(-A * t - 0.5 * B * t * t); });
    ok = ok && D <= eps;
    detail += fmt::format("({},{}) D={:.5f} ", A, B, D);
  }
  return {ok, detail + fmt::format("band={:.5f}", eps)};
}

std::string failed_stats(const diagnostics::CheckReport& r) {
  std::string out;
  for (const auto& s : r.statistics) {
    if (!s.pass) out += fmt::format(" {}={:.4g}", s.name, s.observed);
  }
  return out;
}

// 3. invariance of N(0, Id) at d = 10 from exact initialisation
Outcome stationarity() {
  SamplerConfig cfg;
  cfg.terminal_time = 30.0;
  cfg.seed = seed_for(3);
  const auto r = diagnostics::check_stationarity(IsotropicGaussianPotential(10, 1.0), cfg, 10'000);
  const bool ok = diagnostics::position_moments_pass(r);
  return {ok, fmt::format("n=10000 d=10 T=30; full suite {}{}", r.pass ? "pass" : "fail:",
                          failed_stats(r))};
}

// 4. closed-form appendix integrals and E Xi
Outcome appendix_exactness() {
  bool ok = true;
  double worst_rel = 0.0;
  for (int N = 0; N <= 4; ++N) {
    for (double T : {0.5, 1.0, 3.0}) {
      const double q1 = oracle::simplex_integral(
          N, T, [&](const std::vector<double>& t) { return oracle::squared_gaps(t, T); });
      const double q2 = oracle::simplex_integral(N, T, [&](const std::vector<double>& t) {
        return std::pow(oracle::squared_gaps(t, T), 2);
      });
      const auto a = analytics::appendix_integrals(static_cast<std::size_t>(N), T);
      worst_rel = std::max({worst_rel, std::abs(a.I1 - q1) / q1, std::abs(a.I2 - q2) / q2});
    }
  }
  ok = worst_rel <= 1e-6;
  std::string detail = fmt::format("max rel err I1/I2={:.2e}", worst_rel);

  Rng rng(seed_for(4));
  for (const auto& [L, T] : std::vector<std::pair<double, double>>{{1, 10}, {4, 25}}) {
    const double r = std::sqrt(L);
    const double exact = 2.0 * T / r - 2.0 / L + 2.0 * std::exp(-r * T) / L;
    std::vector<double> xs(100'000);
    for (auto& x : xs) x = diagnostics::simulate_refresh_sequence(r, T, rng).xi;
    const auto mv = stats::mean_var(xs);
    const double z = (mv.mean - exact) / mv.standard_error();
    ok = ok && std::abs(z) <= 3.0;
    detail += fmt::format("; (L={},T={}) mean={:.4f} exact={:.4f} z={:.2f}", L, T, mv.mean,
                          exact, z);
  }
  return {ok, detail};
}

// 5. P(Xi >= 4T / sqrt(L)) at sqrt(L) T = 50
Outcome xi_tail() {
  bool ok = true;
  std::string detail;
  int k = 0;
  for (const auto& [L, T] : std::vector<std::pair<double, double>>{{1, 50}, {4, 25}}) {
    Rng rng(derive_seed(seed_for(5), k++));
    const double r = std::sqrt(L);
    const std::size_t n = 100'000;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (diagnostics::simulate_refresh_sequence(r, T, rng).xi >= 4.0 * T / r) ++hit;
    }
    const double freq = static_cast<double>(hit) / static_cast<double>(n);
    const double b = 2.0 / (r * T);
    const double limit = b + 3.0 * std::sqrt(b * (1 - b) / static_cast<double>(n));
    ok = ok && freq <= limit;
    detail += fmt::format("(L={},T={}) freq={:.5f} limit={:.5f} ", L, T, freq, limit);
  }
  return {ok, detail};
}

// 6. proposed-event exponents in d and T
Outcome event_scaling() {
  diagnostics::ScalingConfig sc;
  sc.seed = seed_for(6);
  const auto r = diagnostics::check_event_scaling(
      [](std::size_t d) { return IsotropicGaussianPotential(d, 1.0); }, sc, 1);
  const auto* dim = r.find("dim_exponent");
  const auto* time = r.find("time_exponent");
  return {dim->pass && time->pass,
          fmt::format("d-exponent={:.3f} [{}, {}] {}; T-exponent={:.3f} [{}, {}] {}; "
                      "ratio exponent={:.3f}",
                      dim->observed, sc.dim_lo, sc.dim_hi, dim->pass ? "ok" : "out",
                      time->observed, sc.time_lo, sc.time_hi, time->pass ? "ok" : "out",
                      r.find("acceptance_ratio_dim_exponent")->observed)};
}

// 7. partial-derivative tails under exact target draws
Outcome partial_tails() {
  bool ok = true;
  std::string detail;
  int k = 0;
  for (double c : {0.5, 1.0}) {
    for (std::size_t d : {10u, 100u}) {
      IsotropicGaussianPotential p(d, 1.0);
      Rng rng(derive_seed(seed_for(7), k++));
      const double thr = 2.0 + 2.0 * c * std::log(static_cast<double>(d));
      const double bound = 3.0 * std::pow(static_cast<double>(d), -c);
      const std::size_t n = 100'000;
      std::vector<std::size_t> hits(d, 0);
      Point x(d);
      for (std::size_t s = 0; s < n; ++s) {
        sample_target(p, rng, x);
        for (std::size_t i = 0; i < d; ++i) {
          if (std::abs(p.partial(x, i)) > thr) ++hits[i];
        }
      }
      const double worst =
          static_cast<double>(*std::max_element(hits.begin(), hits.end())) / static_cast<double>(n);
      ok = ok && worst <= bound;
      detail += fmt::format("(c={},d={}) {:.2e}<={:.3f} ", c, d, worst, bound);
    }
  }
  return {ok, detail};
}

// 8. Gaussian chi-square against 1-D quadrature
Outcome gaussian_chi2() {
  const std::vector<std::pair<double, double>> pairs{
      {1.0, 2.0}, {0.5, 1.0}, {1.5, 1.0}, {0.2, 1.0}, {1.9, 1.0},
      {0.1, 0.3}, {3.0, 2.0}, {0.7, 0.6}, {2.0, 5.0}, {0.05, 0.04}};
  double worst = 0.0;
  for (const auto& [s1, s0] : pairs) {
    const double lim = 40.0 * std::sqrt(std::max(s1, s0));
    const double q = oracle::integrate(
                         [s1 = s1, s0 = s0](double x) {
                           return oracle::squared_density_ratio(x, s1, s0);
                         },
                         -lim, lim, 400, 20) -
                     1.0;
    worst = std::max(worst, std::abs(analytics::gaussian_chi2(s1, s0, 1) - q) / std::abs(q));
  }
  double worst_kappa = 0.0;
  for (const auto& [m, L, d] : std::vector<std::tuple<double, double, std::size_t>>{
           {1.0, 1.5, 4}, {0.5, 2.0, 10}, {1.0, 1.1, 50}}) {
    const double kappa = L / m;
    const double formula =
        std::pow(kappa, d / 2.0) * std::pow(L / (2.0 * L - m), d / 2.0) - 1.0;
    worst_kappa = std::max(
        worst_kappa, std::abs(analytics::gaussian_chi2(1.0 / L, 1.0 / m, d) - formula) / formula);
  }
  return {worst <= 1e-8 && worst_kappa <= 1e-12,
          fmt::format("max rel err quadrature={:.2e}, kappa formula={:.2e}", worst, worst_kappa)};
}

// 9. LMC variance recursion over 50 steps
Outcome lmc_recursion() {
  const double m = 1.0, h = 0.1, s0 = 4.0;
  IsotropicGaussianPotential p(1, m);
  CountingOracle<IsotropicGaussianPotential> oracle(p);
  const std::size_t chains = 10'000;
  Rng rng(seed_for(9));
  std::vector<Point> xs(chains, Point(1));
  for (auto& x : xs) x[0] = std::sqrt(s0) * rng.normal();
  double sigma = s0;
  double worst_z = 0.0;
  std::vector<double> col(chains);
  for (int step = 0; step < 50; ++step) {
    for (auto& x : xs) x = lmc_step(x, oracle, h, rng);
    sigma = (1 - h * m) * (1 - h * m) * sigma + 2 * h;
    for (std::size_t k = 0; k < chains; ++k) col[k] = xs[k][0];
    const auto mv = stats::mean_var(col);
    const double se = sigma * std::sqrt(2.0 / (static_cast<double>(chains) - 1.0));
    worst_z = std::max(worst_z, std::abs(mv.variance - sigma) / se);
  }
  return {worst_z <= 3.0, fmt::format("chains=10000 steps=50 max |z|={:.2f}", worst_z)};
}

// 10. warm-started pipeline at d = 64, kappa = 1
Outcome hybrid_pipeline() {
  const std::size_t d = 64;
  const auto cs = corollary_schedule(d, 1.0, 1.0);
  const double dd = 64.0;
  const double scale = std::pow(dd, 0.8);
  const auto N_expected = static_cast<std::size_t>(std::ceil(scale - 1e-9));
  const double h_expected = 0.8 / scale * std::log(dd);
  const bool formulas = cs.schedule.n_steps == N_expected &&
                        std::abs(cs.schedule.step_size - h_expected) <=
                            4 * std::numeric_limits<double>::epsilon() * h_expected &&
                        cs.schedule.init_cov_scale == 0.5;
  const bool step = cs.schedule.step_size <= 0.25 && cs.step_condition;

  IsotropicGaussianPotential p(d, 1.0);
  HybridConfig hc;
  hc.seed = seed_for(10);
  const auto res = hybrid_sample(p, hc, 10'000);
  const auto r = diagnostics::stationarity_report(p, res.samples.positions,
                                                  res.samples.velocities, seed_for(10) + 1);
  const bool moments = diagnostics::position_moments_pass(r);
  return {formulas && step && moments,
          fmt::format("N={} h={:.6f} T={:.3f} formulas {} step {} stationarity {}{}",
                      cs.schedule.n_steps, cs.schedule.step_size, res.terminal_time,
                      formulas ? "ok" : "off", step ? "ok" : "off", moments ? "ok" : "fail:",
                      moments ? "" : failed_stats(r))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli_args(std::vector<std::string> args) {
  args.insert(args.begin(), "pdmp-zigzag");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

// 11. byte-identical outputs across executions and job counts
Outcome determinism() {
  const auto root = fs::temp_directory_path() / "zigzag_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto manifest = root / "m.json";
  std::ofstream(manifest) << R"({"schema_version": 1, "potential": "softened", "dim": 6,
    "params": {"a": 1.0, "b": 2.0}, "sampler": {"T": 8.0, "record_events": true},
    "init": {"type": "gaussian", "variance": 0.5}, "n_trajectories": 40,
    "seed": )" << seed_for(11)
                          << "}";
  const std::vector<std::string> jobs{"1", "1", "4"};
  for (std::size_t r = 0; r < jobs.size(); ++r) {
    const int code = run_cli_args({"sample", "--manifest", manifest.string(), "--out",
                                   (root / std::to_string(r)).string(), "--jobs", jobs[r]});
    if (code != 0) return {false, fmt::format("run {} exited {}", r, code)};
  }
  std::size_t compared = 0, mismatched = 0;
  for (const auto& entry : fs::directory_iterator(root / "0")) {
    const auto name = entry.path().filename();
    if (name == "stats.json") continue;
    const auto ref = slurp(entry.path());
    for (std::size_t r = 1; r < jobs.size(); ++r) {
      ++compared;
      if (slurp(root / std::to_string(r) / name) != ref) ++mismatched;
    }
  }
  auto stats_without_metadata = [&](std::size_t r) {
    auto j = json::parse(slurp(root / std::to_string(r) / "stats.json"));
    j.erase("metadata");
    return j;
  };
  const bool stats_equal = stats_without_metadata(0) == stats_without_metadata(1) &&
                           stats_without_metadata(0) == stats_without_metadata(2);
  fs::remove_all(root);
  return {mismatched == 0 && compared >= 2 * 41 && stats_equal,
          fmt::format("files compared={} mismatched={} stats {}", compared, mismatched,
                      stats_equal ? "equal" : "differ")};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "thinning soundness", thinning_soundness},
      {2, "clock inversion law", clock_inversion},
      {3, "stationarity on Gaussians", stationarity},
      {4, "simplex integrals and mean of Xi", appendix_exactness},
      {5, "tail of Xi", xi_tail},
      {6, "event-count scaling", event_scaling},
      {7, "partial-derivative tails", partial_tails},
      {8, "Gaussian chi-square", gaussian_chi2},
      {9, "LMC variance recursion", lmc_recursion},
      {10, "hybrid pipeline", hybrid_pipeline},
      {11, "determinism", determinism},
  };
  bool all_pass = true, ran = false;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    ran = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_pass = all_pass && o.pass;
    fmt::print("criterion {:2d} {}: {} ({:.1f}s) {}\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
               secs, o.detail);
    std::fflush(stdout);
  }
  if (!ran) {
    fmt::print(stderr, "no criterion {}\n", only);
    return 2;
  }
  return all_pass ? 0 : 1;
}
