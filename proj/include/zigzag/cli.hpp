#pragma once

// pdmp-zigzag command line: sample, hybrid, scan-dim, scan-time, verify,
// analytics, inspect-log.
//
// Exit codes: 0 success, 1 runtime failure or failed check, 2 usage or
// configuration error.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "zigzag/analytics.hpp"
#include "zigzag/diagnostics.hpp"
#include "zigzag/lmc.hpp"
#include "zigzag/logging.hpp"
#include "zigzag/manifest.hpp"
#include "zigzag/output.hpp"
#include "zigzag/parallel.hpp"
#include "zigzag/potentials.hpp"
#include "zigzag/sampler.hpp"

namespace zigzag::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{
      "assumption2",         "sup_potential",  "xi_tail",
      "partial_derivative_concentration", "event_scaling", "stationarity"};
  return names;
}

struct Options {
  std::string manifest;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t jobs = 0;
  std::string potential;
  std::size_t dim = 0;
  std::string params;
  double T = 0.0;
  std::size_t n = 0;
  std::string warmstart;
  std::string init;
  bool record_events = false;
  // hybrid
  double epsilon = 0.1;
  double K = 1.0;
  // scans / verify
  std::vector<std::size_t> dims;
  std::vector<double> times;
  std::size_t runs = 20;
  std::size_t fixed_dim = 16;
  std::vector<std::string> checks;
  // inspect-log
  std::string log_path;
};

namespace detail {

using ojson = zigzag::json;

inline ojson parse_json_arg(const std::string& text, const char* what) {
  try {
    return ojson::parse(text);
  } catch (const ojson::parse_error&) {
    throw UsageError(std::string("--") + what + " is not valid JSON");
  }
}

/// none | corollary | custom(N,h)
inline ojson parse_warmstart_flag(const std::string& s) {
  if (s == "none" || s == "corollary") return ojson{{"mode", s}};
  static const std::regex re(R"(custom\(\s*([0-9]+)\s*,\s*([^,\s)]+)\s*(?:,\s*([^,\s)]+)\s*)?\))");
  std::smatch mt;
  if (std::regex_match(s, mt, re)) {
    try {
      ojson out{{"mode", "custom"},
                {"N", std::stoull(mt[1].str())},
                {"h", std::stod(mt[2].str())}};
      if (mt[3].matched) out["init_variance"] = std::stod(mt[3].str());
      return out;
    } catch (const std::exception&) {
    }
  }
  throw UsageError("--warmstart must be none, corollary or custom(N,h)");
}

inline bool flag_given(const CLI::App& app, const char* flag) {
  const auto* opt = app.get_option_no_throw(flag);
  return opt != nullptr && opt->count() > 0;
}

inline ojson optional_json(const std::optional<bool>& v) { return v ? ojson(*v) : ojson(); }

/// Manifest file (if any) with command-line overrides applied on top.
inline ExperimentManifest build_manifest(const Options& o, const CLI::App& app) {
  ojson j = ojson::object();
  std::string base_dir;
  if (!o.manifest.empty()) {
    std::ifstream in(o.manifest);
    if (!in) throw ManifestError("cannot open manifest: " + o.manifest);
    try {
      j = ojson::parse(in);
    } catch (const ojson::parse_error& e) {
      throw ManifestError(std::string("manifest parse error: ") + e.what());
    }
    base_dir = std::filesystem::path(o.manifest).parent_path().string();
  }
  auto given = [&](const char* flag) { return flag_given(app, flag); };
  if (given("--potential")) j["potential"] = o.potential;
  if (given("--dim")) j["dim"] = o.dim;
  if (given("--params")) j["params"] = parse_json_arg(o.params, "params");
  if (given("--T")) j["sampler"]["T"] = o.T;
  if (given("--record-events")) j["sampler"]["record_events"] = true;
  if (given("--n")) j["n_trajectories"] = o.n;
  if (given("--seed")) j["seed"] = o.seed;
  if (given("--out")) j["output"]["dir"] = o.out;
  if (given("--warmstart")) j["warmstart"] = parse_warmstart_flag(o.warmstart);
  if (given("--init")) j["init"] = parse_json_arg(o.init, "init");
  if (given("--epsilon")) j["hybrid"]["epsilon"] = o.epsilon;
  if (given("--K")) j["hybrid"]["K"] = o.K;
  if (!j.contains("potential")) {
    throw UsageError("no potential: pass --manifest or --potential with --dim");
  }
  if (!j.contains("dim") && j.value("potential", "") != "diagonal") {
    throw UsageError("no dimension: pass --dim or set \"dim\" in the manifest");
  }
  return manifest_from_json(j, base_dir);
}

inline void log_constants(const AnyPotential& pot, const SamplerConfig& cfg) {
  std::visit(
      [&](const auto& p) {
        logger()->info("potential {} d={} m={} L={}", potential_kind(pot), p.dim(),
                       p.m(), p.L());
        if (!(p.m() <= 1.0 && 1.0 <= p.L())) {
          logger()->warn("m <= 1 <= L does not hold (m={}, L={}); running anyway",
                         p.m(), p.L());
        }
        if (cfg.refresh_rate_for(p.L()) == 0.0) {
          logger()->warn("refresh rate 0: no refreshments, the process may be reducible");
        }
      },
      pot);
}

inline std::filesystem::path out_dir(const ExperimentManifest& m) {
  return std::filesystem::path(m.output_dir.empty() ? "." : m.output_dir);
}

inline ojson metadata(std::chrono::steady_clock::time_point start, std::size_t jobs) {
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ojson{{"wall_clock_seconds", secs}, {"jobs", jobs}};
}

inline void write_sample_outputs(const std::filesystem::path& dir, const SampleSet& set) {
  {
    auto f = open_output(dir / "samples.csv");
    write_samples_csv(f, set.positions);
  }
  for (std::size_t k = 0; k < set.events.size(); ++k) {
    auto f = open_output(dir / ("events_" + std::to_string(k) + ".jsonl"));
    write_events_jsonl(f, set.events[k]);
  }
}

inline ojson per_trajectory_json(const SampleSet& set) {
  ojson arr = ojson::array();
  for (const auto& s : set.per_trajectory) arr.push_back(to_json(s));
  return arr;
}

template <class T>
T param_or(const ojson& params, const char* key, T fallback) {
  if (!params.is_object() || !params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const ojson::exception&) {
    throw ManifestError(std::string("check parameter '") + key + "' has the wrong type");
  }
}

// Fixed per-check stream so results do not depend on which checks run together.
inline std::uint64_t check_seed(std::uint64_t master, const std::string& name) {
  const auto& names = check_names();
  const auto it = std::find(names.begin(), names.end(), name);
  return derive_seed(master, 1000 + static_cast<std::uint64_t>(it - names.begin()));
}

inline diagnostics::CheckReport run_check(const ExperimentManifest& m,
                                          const CheckSpec& spec, std::size_t jobs) {
  const ojson& params = spec.params;
  const std::uint64_t seed = check_seed(m.sampler.seed, spec.name);
  const double T = param_or<double>(params, "T", m.sampler.terminal_time);

  return std::visit(
      [&](const auto& p) -> diagnostics::CheckReport {
        using P = std::decay_t<decltype(p)>;
        if (spec.name == "assumption2") {
          return diagnostics::check_assumption2(
              m.init, p, param_or<std::size_t>(params, "n_draws", 10000),
              param_or<double>(params, "K", m.hybrid_K), seed);
        }
        if (spec.name == "sup_potential") {
          const auto dims = param_or<std::vector<std::size_t>>(
              params, "dims", std::vector<std::size_t>{8, 16, 32, 64});
          SamplerConfig cfg = m.sampler;
          cfg.terminal_time = T;
          cfg.seed = seed;
          const auto ens = diagnostics::collect_dimension_ensembles(
              [&](std::size_t d) { return std::get<P>(with_dimension(p, d)); }, dims,
              param_or<std::size_t>(params, "runs", 20), cfg, jobs);
          return diagnostics::check_sup_potential(ens, p.m(), p.L(), T);
        }
        if (spec.name == "xi_tail") {
          return diagnostics::check_xi_tail(param_or<std::size_t>(params, "n_runs", 100000),
                                            param_or<double>(params, "L", p.L()), T, seed);
        }
        if (spec.name == "event_scaling") {
          diagnostics::ScalingConfig sc;
          sc.dims = param_or(params, "dims", sc.dims);
          sc.times = param_or(params, "times", sc.times);
          sc.fixed_dim = param_or(params, "fixed_dim", sc.fixed_dim);
          sc.terminal_time = param_or(params, "T", sc.terminal_time);
          sc.runs = param_or(params, "runs", sc.runs);
          sc.seed = seed;
          return diagnostics::check_event_scaling(
              [&](std::size_t d) { return std::get<P>(with_dimension(p, d)); }, sc, jobs);
        }
        if constexpr (GaussianPotential<P>) {
          if (spec.name == "partial_derivative_concentration") {
            return diagnostics::check_partial_derivative_concentration(
                p, param_or<std::size_t>(params, "n_draws", 100000),
                param_or<double>(params, "c", 1.0), seed);
          }
          if (spec.name == "stationarity") {
            SamplerConfig cfg = m.sampler;
            cfg.terminal_time = T;
            cfg.seed = seed;
            cfg.record_events = false;
            return diagnostics::check_stationarity(
                p, cfg, param_or<std::size_t>(params, "n_samples", m.n_trajectories), jobs);
          }
        } else {
          if (spec.name == "partial_derivative_concentration" ||
              spec.name == "stationarity") {
            throw ManifestError("check '" + spec.name + "' needs a Gaussian potential");
          }
        }
        throw UsageError("unknown check '" + spec.name + "'");
      },
      m.potential);
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_sample(const Options& o, const CLI::App& app) {
  const auto start = std::chrono::steady_clock::now();
  const auto m = detail::build_manifest(o, app);
  detail::log_constants(m.potential, m.sampler);
  const auto ws = resolve_warmstart(m);
  logger()->info("sampling {} trajectories to T={}", m.n_trajectories,
                 m.sampler.terminal_time);
  const SampleSet set = std::visit(
      [&](const auto& p) {
        return sample_with_warmstart(p, m.sampler, m.init, ws, m.n_trajectories, o.jobs);
      },
      m.potential);

  const auto dir = detail::out_dir(m);
  detail::write_sample_outputs(dir, set);
  json stats{{"schema_version", kManifestSchemaVersion},
             {"command", "sample"},
             {"seed", m.sampler.seed},
             {"config", to_json(m)},
             {"warmstart", ws ? to_json(*ws) : json()},
             {"stats", to_json(set.stats)},
             {"warmstart_evals", set.warmstart_evals},
             {"per_trajectory", detail::per_trajectory_json(set)},
             {"metadata", detail::metadata(start, resolve_jobs(o.jobs))}};
  write_json_file(dir / "stats.json", stats);
  return kOk;
}

inline int cmd_hybrid(const Options& o, const CLI::App& app) {
  const auto start = std::chrono::steady_clock::now();
  const auto m = detail::build_manifest(o, app);
  detail::log_constants(m.potential, m.sampler);
  HybridConfig hc;
  hc.epsilon = m.hybrid_epsilon;
  hc.K = m.hybrid_K;
  hc.seed = m.sampler.seed;
  hc.record_events = m.sampler.record_events;
  hc.max_events = m.sampler.max_events;
  if (m.warmstart_mode == WarmstartMode::custom) hc.schedule = m.custom_schedule;

  const HybridResult res = std::visit(
      [&](const auto& p) {
        try {
          if (!hc.schedule) {
            const auto cs = corollary_schedule(p.dim(), p.m(), p.L());
            if (!cs.step_condition) {
              logger()->warn("step size {} exceeds m/(4L^2)", cs.schedule.step_size);
            }
            logger()->info("regime ratio {} (reported, not enforced)", cs.regime_ratio);
          }
          return hybrid_sample(p, hc, m.n_trajectories, o.jobs);
        } catch (const std::domain_error& e) {
          throw ManifestError(e.what());
        }
      },
      m.potential);

  const auto dir = detail::out_dir(m);
  detail::write_sample_outputs(dir, res.samples);
  json stats{{"schema_version", kManifestSchemaVersion},
             {"command", "hybrid"},
             {"seed", m.sampler.seed},
             {"config", to_json(m)},
             {"schedule", to_json(res.schedule)},
             {"terminal_time", res.terminal_time},
             {"cost",
              {{"lmc_evals", res.lmc_evals},
               {"zigzag_evals", res.zigzag_evals},
               {"total", res.lmc_evals + res.zigzag_evals}}},
             {"stats", to_json(res.samples.stats)},
             {"per_trajectory", detail::per_trajectory_json(res.samples)},
             {"metadata", detail::metadata(start, resolve_jobs(o.jobs))}};
  write_json_file(dir / "stats.json", stats);
  return kOk;
}

inline json scan_json(const diagnostics::ScalingScan& scan, const char* param,
                      const std::function<double(double)>& predicted) {
  json pts = json::array();
  for (const auto& pt : scan.points) {
    pts.push_back({{param, pt.parameter},
                   {"mean_proposed", pt.mean_proposed},
                   {"mean_ratio", pt.mean_ratio},
                   {"total_proposed", pt.total_proposed},
                   {"total_accepted", pt.total_accepted},
                   {"predicted_scale", predicted(pt.parameter)}});
  }
  return json{{"points", pts},
              {"events_exponent", scan.events_fit.slope},
              {"events_exponent_se", scan.events_fit.slope_standard_error},
              {"ratio_exponent", scan.ratio_fit.slope},
              {"ratio_exponent_se", scan.ratio_fit.slope_standard_error}};
}

inline int cmd_scan(const Options& o, const CLI::App& app, bool over_dim) {
  const auto start = std::chrono::steady_clock::now();
  const auto m = detail::build_manifest(o, app);
  diagnostics::ScalingConfig sc;
  sc.seed = m.sampler.seed;
  sc.runs = o.runs;
  sc.terminal_time = m.sampler.terminal_time;
  if (!o.dims.empty()) sc.dims = o.dims;
  if (!o.times.empty()) sc.times = o.times;
  if (detail::flag_given(app, "--fixed-dim")) sc.fixed_dim = o.fixed_dim;

  json out = std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        auto factory = [&](std::size_t d) { return std::get<P>(with_dimension(p, d)); };
        if (over_dim) {
          const auto scan = diagnostics::scan_dimension(factory, sc, o.jobs);
          return scan_json(scan, "d", [&](double d) {
            return analytics::proposal_rate_scale(d, p.m(), p.L(), sc.terminal_time) *
                   sc.terminal_time;
          });
        }
        const auto scan = diagnostics::scan_time(factory, sc, o.jobs);
        return scan_json(scan, "T", [&](double t) {
          return analytics::proposal_rate_scale(static_cast<double>(sc.fixed_dim), p.m(),
                                                p.L(), t) * t;
        });
      },
      m.potential);
  out["command"] = over_dim ? "scan-dim" : "scan-time";
  out["runs"] = sc.runs;
  out["seed"] = sc.seed;
  out["metadata"] = detail::metadata(start, resolve_jobs(o.jobs));
  write_json_file(detail::out_dir(m) / (over_dim ? "scan_dim.json" : "scan_time.json"), out);
  std::cout << out.dump(2) << '\n';
  return kOk;
}

inline int cmd_verify(const Options& o, const CLI::App& app) {
  const auto start = std::chrono::steady_clock::now();
  const auto m = detail::build_manifest(o, app);
  detail::log_constants(m.potential, m.sampler);

  std::vector<CheckSpec> specs;
  if (!o.checks.empty()) {
    for (const auto& raw : o.checks) {
      std::stringstream ss(raw);
      std::string name;
      while (std::getline(ss, name, ',')) {
        if (name.empty()) continue;
        if (name == "all") {
          for (const auto& n : check_names()) specs.push_back({n, json::object()});
          continue;
        }
        specs.push_back({name, json::object()});
      }
    }
    // Parameters for a named check come from the manifest entry of that name.
    for (auto& s : specs) {
      for (const auto& mc : m.checks) {
        if (mc.name == s.name) s.params = mc.params;
      }
    }
  } else {
    specs = m.checks;
  }
  if (specs.empty()) throw UsageError("verify: no checks given (use --checks or a manifest)");
  for (const auto& s : specs) {
    const auto& names = check_names();
    if (std::find(names.begin(), names.end(), s.name) == names.end()) {
      throw UsageError("unknown check '" + s.name + "'");
    }
  }

  std::vector<diagnostics::CheckReport> reports;
  bool all_pass = true;
  for (const auto& s : specs) {
    logger()->info("running check {}", s.name);
    try {
      reports.push_back(detail::run_check(m, s, o.jobs));
    } catch (const std::invalid_argument& e) {
      throw ManifestError("check '" + s.name + "': " + e.what());
    }
    all_pass = all_pass && reports.back().pass;
    std::cout << s.name << ": " << (reports.back().pass ? "PASS" : "FAIL") << '\n';
  }

  const auto dir = detail::out_dir(m);
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  write_json_file(dir / "reports.json",
                  json{{"schema_version", kManifestSchemaVersion},
                       {"seed", m.sampler.seed},
                       {"config", to_json(m)},
                       {"pass", all_pass},
                       {"reports", arr},
                       {"metadata", detail::metadata(start, resolve_jobs(o.jobs))}});
  auto csv = open_output(dir / "reports.csv");
  write_reports_csv(csv, reports);
  return all_pass ? kOk : kFailure;
}

struct AnalyticsOptions {
  double m = 0, L = 0, T = 0, epsilon = 0, chi2 = 0, K = 1, c = 1, sigma1 = 0, sigma0 = 0;
  std::size_t d = 0, N = 0;
};

inline int cmd_analytics(const AnalyticsOptions& a, const CLI::App& app) {
  auto has = [&](const char* f) { return detail::flag_given(app, f); };
  json out = json::object();
  if (has("--m") && has("--L") && has("--epsilon") && has("--chi2")) {
    const auto tb = analytics::choose_T(a.m, a.L, a.epsilon, a.chi2, a.K,
                                        has("--d") ? std::optional<std::size_t>(a.d)
                                                   : std::nullopt);
    out["choose_T"] = {{"T", tb.T},
                       {"bracket", tb.bracket},
                       {"warm_start_ok", detail::optional_json(tb.warm_start_ok)},
                       {"epsilon_floor_ok", detail::optional_json(tb.epsilon_floor_ok)}};
  }
  if (has("--L") && has("--T")) {
    const auto xm = analytics::xi_moments(a.L, a.T);
    out["xi_moments"] = {{"mean", xm.mean},
                         {"second_moment", xm.second_moment},
                         {"variance", xm.variance},
                         {"mean_bound", xm.mean_bound},
                         {"variance_bound", xm.variance_bound},
                         {"tail_threshold", xm.tail_threshold},
                         {"tail_probability_bound", xm.tail_probability_bound}};
  }
  if (has("--N") && has("--T")) {
    const auto ai = analytics::appendix_integrals(a.N, a.T);
    out["conditional_xi"] = {
        {"mean", analytics::conditional_xi_moment(a.N, a.T)},
        {"second_moment", analytics::conditional_xi_second_moment(a.N, a.T)},
        {"I1", ai.I1},
        {"I2", ai.I2}};
  }
  if (has("--sigma1") && has("--sigma0") && has("--d")) {
    out["gaussian_chi2"] = number_json(analytics::gaussian_chi2(a.sigma1, a.sigma0, a.d));
  }
  if (has("--L") && has("--d")) {
    const auto tb = analytics::lemma5_tail_bound(a.L, a.d, a.c);
    out["partial_tail_bound"] = {{"c", a.c},
                                 {"threshold", tb.threshold},
                                 {"probability_bound", tb.probability_bound}};
  }
  if (has("--d") && has("--m") && has("--L")) {
    if (has("--T")) {
      out["proposal_rate_scale"] =
          analytics::proposal_rate_scale(static_cast<double>(a.d), a.m, a.L, a.T);
    }
    try {
      const auto cs = corollary_schedule(a.d, a.m, a.L);
      out["corollary_schedule"] = to_json(cs.schedule);
      out["corollary_schedule"]["kappa"] = cs.kappa;
      out["corollary_schedule"]["step_condition"] = cs.step_condition;
      out["corollary_schedule"]["regime_ratio"] = cs.regime_ratio;
      if (has("--epsilon")) {
        out["corollary_terminal_time"] =
            analytics::corollary_terminal_time(a.d, a.m, a.L, a.epsilon, a.K);
      }
    } catch (const std::exception& e) {
      out["corollary_schedule"] = {{"error", e.what()}};
    }
  }
  if (out.empty()) throw UsageError("analytics: not enough inputs for any quantity");
  std::cout << out.dump(2) << '\n';
  return kOk;
}

inline int cmd_inspect_log(const Options& o) {
  std::ifstream in(o.log_path);
  if (!in) throw UsageError("cannot open event log: " + o.log_path);
  std::size_t counts[4] = {0, 0, 0, 0};
  std::size_t n = 0, line_no = 0;
  double last_t = -1.0, max_ratio = 0.0, ratio_sum = 0.0, max_xnorm = 0.0;
  bool monotone = true, ratios_ok = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    EventRecord e;
    try {
      e = event_from_json(json::parse(line));
    } catch (const std::exception& ex) {
      throw UsageError("event log line " + std::to_string(line_no) + ": " + ex.what());
    }
    ++n;
    ++counts[static_cast<int>(e.kind)];
    monotone = monotone && e.time >= last_t;
    last_t = e.time;
    max_xnorm = std::max(max_xnorm, e.position_norm);
    const bool bounce = e.kind == EventKind::proposed_bounce ||
                        e.kind == EventKind::accepted_bounce;
    if (bounce) {
      if (!e.thinning_ratio || !(*e.thinning_ratio >= 0.0 && *e.thinning_ratio <= 1.0)) {
        ratios_ok = false;
      } else {
        max_ratio = std::max(max_ratio, *e.thinning_ratio);
        ratio_sum += *e.thinning_ratio;
      }
    } else if (e.thinning_ratio) {
      ratios_ok = false;
    }
  }
  const std::size_t n_bounce = counts[1] + counts[2];
  json out{{"n_events", n},
           {"n_refresh", counts[0]},
           {"n_proposed", n_bounce},
           {"n_accepted", counts[2]},
           {"n_terminal", counts[3]},
           {"t_final", n ? last_t : 0.0},
           {"mean_ratio", n_bounce ? ratio_sum / static_cast<double>(n_bounce) : 0.0},
           {"max_ratio", max_ratio},
           {"max_xnorm", max_xnorm},
           {"time_monotone", monotone},
           {"ratios_valid", ratios_ok}};
  std::cout << out.dump(2) << '\n';
  return monotone && ratios_ok ? kOk : kFailure;
}

// ---------------------------------------------------------------------------

inline void add_run_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--manifest", o.manifest, "JSON experiment manifest");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--jobs", o.jobs, "worker threads (0 = all cores)");
  cmd->add_option("--potential", o.potential, "isotropic | diagonal | softened");
  cmd->add_option("--dim", o.dim, "dimension");
  cmd->add_option("--params", o.params, "potential parameters as JSON");
  cmd->add_option("--T", o.T, "terminal time")->check(CLI::NonNegativeNumber);
  cmd->add_option("--n", o.n, "number of trajectories");
  cmd->add_option("--init", o.init, "initial law as JSON, e.g. {\"type\":\"target\"}");
  cmd->add_flag("--record-events", o.record_events, "write events_<k>.jsonl");
}

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Zigzag sampler for strongly log-concave targets", "pdmp-zigzag"};
  app.require_subcommand(1);
  Options o;
  AnalyticsOptions a;

  auto* sample_cmd = app.add_subcommand("sample", "run zigzag trajectories");
  add_run_options(sample_cmd, o);
  sample_cmd->add_option("--warmstart", o.warmstart, "none | corollary | custom(N,h)");

  auto* hybrid_cmd = app.add_subcommand("hybrid", "LMC warm start followed by zigzag");
  add_run_options(hybrid_cmd, o);
  hybrid_cmd->add_option("--epsilon", o.epsilon, "target accuracy");
  hybrid_cmd->add_option("--K", o.K, "warm-start constant");
  hybrid_cmd->add_option("--warmstart", o.warmstart, "corollary | custom(N,h)");

  auto* dim_cmd = app.add_subcommand("scan-dim", "proposed events over dimensions");
  add_run_options(dim_cmd, o);
  dim_cmd->add_option("--dims", o.dims, "dimension grid")->delimiter(',');
  dim_cmd->add_option("--runs", o.runs, "trajectories per grid point");

  auto* time_cmd = app.add_subcommand("scan-time", "proposed events over terminal times");
  add_run_options(time_cmd, o);
  time_cmd->add_option("--times", o.times, "terminal-time grid")->delimiter(',');
  time_cmd->add_option("--runs", o.runs, "trajectories per grid point");
  time_cmd->add_option("--fixed-dim", o.fixed_dim, "dimension of the time scan");

  auto* verify_cmd = app.add_subcommand("verify", "run diagnostic checks");
  add_run_options(verify_cmd, o);
  verify_cmd->add_option("--checks,checks", o.checks,
                         "check names, comma separated, or 'all'");
  verify_cmd->add_option("--K", o.K, "warm-start constant");

  auto* an_cmd = app.add_subcommand("analytics", "closed-form quantities as JSON");
  an_cmd->add_option("--m", a.m);
  an_cmd->add_option("--L", a.L);
  an_cmd->add_option("--d", a.d);
  an_cmd->add_option("--T", a.T);
  an_cmd->add_option("--N", a.N);
  an_cmd->add_option("--epsilon", a.epsilon);
  an_cmd->add_option("--chi2", a.chi2);
  an_cmd->add_option("--K", a.K);
  an_cmd->add_option("--c", a.c);
  an_cmd->add_option("--sigma1", a.sigma1, "initial variance");
  an_cmd->add_option("--sigma0", a.sigma0, "target variance");

  auto* log_cmd = app.add_subcommand("inspect-log", "summarise an events_<k>.jsonl file");
  log_cmd->add_option("path", o.log_path, "event log")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sample_cmd) return cmd_sample(o, *sample_cmd);
    if (*hybrid_cmd) return cmd_hybrid(o, *hybrid_cmd);
    if (*dim_cmd) return cmd_scan(o, *dim_cmd, true);
    if (*time_cmd) return cmd_scan(o, *time_cmd, false);
    if (*verify_cmd) return cmd_verify(o, *verify_cmd);
    if (*an_cmd) return cmd_analytics(a, *an_cmd);
    if (*log_cmd) return cmd_inspect_log(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ManifestError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const ThinningViolation& e) {
    std::cerr << "thinning violation: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace zigzag::cli
