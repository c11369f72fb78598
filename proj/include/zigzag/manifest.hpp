#pragma once

// JSON experiment manifests.
//
//   {
//     "schema_version": 1,
//     "potential": "isotropic" | "diagonal" | "softened",
//     "dim": 10,
//     "params": {"m": 1} | {"precisions": [...]} | {"a": 1, "b": 1},
//     "sampler": {"T": 10, "refresh_rate": 1, "record_events": false,
//                 "max_events": 100000000},
//     "init": {"type": "point", "x": [...]} | {"type": "gaussian",
//              "mean": [...], "variance": 0.5} | {"type": "target"} |
//             {"type": "draws", "path": "init.csv"},
//     "n_trajectories": 100,
//     "seed": 42,
//     "warmstart": {"mode": "none" | "corollary" | "custom", "N": 28, "h": 0.1,
//                   "init_variance": 0.5},
//     "hybrid": {"epsilon": 0.1, "K": 1},
//     "checks": ["xi_tail", {"name": "stationarity", "params": {...}}],
//     "output": {"dir": "out"}
//   }
//
// "params" may also carry "declared_m" / "declared_L", which replace the
// constants the sampler is told without changing the potential.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zigzag/lmc.hpp"
#include "zigzag/potentials.hpp"
#include "zigzag/sampler.hpp"

namespace zigzag {

using json = nlohmann::ordered_json;

inline constexpr int kManifestSchemaVersion = 1;

/// Malformed or inconsistent configuration (CLI exit code 2).
class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckSpec {
  std::string name;
  json params = json::object();
};

enum class WarmstartMode { none, corollary, custom };

struct ExperimentManifest {
  int schema_version = kManifestSchemaVersion;
  json potential_spec;  // {"potential", "dim", "params"} as given
  AnyPotential potential = IsotropicGaussianPotential(1, 1.0);
  SamplerConfig sampler;
  json init_spec = json{{"type", "point"}};
  InitialDistribution init = PointMass{};
  std::size_t n_trajectories = 1;
  WarmstartMode warmstart_mode = WarmstartMode::none;
  std::optional<LmcSchedule> custom_schedule;
  double hybrid_epsilon = 0.1;
  double hybrid_K = 1.0;
  std::vector<CheckSpec> checks;
  std::string output_dir = ".";
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ManifestError(std::string("manifest field '") + key + "': " + e.what());
  }
}

inline std::vector<Point> read_draws_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open initial draws file: " + path);
  std::vector<Point> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.find_first_of("xX") != std::string::npos) {
      first = false;
      continue;  // header
    }
    first = false;
    Point row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ManifestError("bad number '" + cell + "' in " + path);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Builds a potential from {"potential", "dim", "params"}.
inline AnyPotential potential_from_json(const json& j) {
  if (!j.is_object() || !j.contains("potential")) {
    throw ManifestError("manifest needs a \"potential\" field");
  }
  const auto kind = j.at("potential").get<std::string>();
  const json params = j.value("params", json::object());
  const auto dim = detail::get_or<std::size_t>(j, "dim", 0);

  auto apply_declared = [&](auto p) -> AnyPotential {
    const double m = detail::get_or<double>(params, "declared_m", p.m());
    const double L = detail::get_or<double>(params, "declared_L", p.L());
    if (!(m > 0.0) || !(L > 0.0)) throw ManifestError("declared constants must be positive");
    if (m != p.m() || L != p.L()) return p.with_declared(m, L);
    return p;
  };

  try {
    if (kind == "isotropic") {
      if (dim == 0) throw ManifestError("isotropic potential needs dim >= 1");
      const double m = detail::get_or<double>(params, "m",
                                              detail::get_or<double>(params, "precision", 1.0));
      return apply_declared(IsotropicGaussianPotential(dim, m));
    }
    if (kind == "diagonal") {
      auto a = detail::get_or<std::vector<double>>(params, "precisions", {});
      if (a.empty()) throw ManifestError("diagonal potential needs params.precisions");
      if (dim != 0 && dim != a.size()) {
        throw ManifestError("diagonal potential: dim does not match precisions");
      }
      return apply_declared(DiagonalGaussianPotential(std::move(a)));
    }
    if (kind == "softened") {
      if (dim == 0) throw ManifestError("softened potential needs dim >= 1");
      return apply_declared(SoftenedQuadraticPotential(
          dim, detail::get_or<double>(params, "a", 1.0),
          detail::get_or<double>(params, "b", 1.0)));
    }
  } catch (const std::invalid_argument& e) {
    throw ManifestError(std::string("potential: ") + e.what());
  }
  throw ManifestError("unknown potential '" + kind + "'");
}

/// Same family and parameters in dimension d (for dimension scans).
inline AnyPotential with_dimension(const AnyPotential& p, std::size_t d) {
  if (const auto* iso = std::get_if<IsotropicGaussianPotential>(&p)) {
    return IsotropicGaussianPotential(d, iso->precision(0));
  }
  if (const auto* soft = std::get_if<SoftenedQuadraticPotential>(&p)) {
    return SoftenedQuadraticPotential(d, soft->a(), soft->b());
  }
  const auto& diag = std::get<DiagonalGaussianPotential>(p);
  const auto& a = diag.precisions();
  if (std::all_of(a.begin(), a.end(), [&](double v) { return v == a.front(); })) {
    return DiagonalGaussianPotential(std::vector<double>(d, a.front()));
  }
  throw ManifestError("a non-uniform diagonal potential cannot be rescaled in dimension");
}

inline InitialDistribution init_from_json(const json& j, const std::string& base_dir) {
  const auto type = detail::get_or<std::string>(j, "type", "point");
  if (type == "point") return PointMass{detail::get_or<Point>(j, "x", {})};
  if (type == "gaussian") {
    const double var = detail::get_or<double>(j, "variance", 1.0);
    if (!(var >= 0.0)) throw ManifestError("init variance must be >= 0");
    return IsotropicGaussianInit{detail::get_or<Point>(j, "mean", {}), var};
  }
  if (type == "target") return TargetInit{};
  if (type == "draws") {
    auto path = detail::get_or<std::string>(j, "path", "");
    if (path.empty()) throw ManifestError("init type 'draws' needs a path");
    if (path.front() != '/' && !base_dir.empty()) path = base_dir + "/" + path;
    return ExternalDraws{detail::read_draws_csv(path)};
  }
  throw ManifestError("unknown init type '" + type + "'");
}

inline WarmstartMode parse_warmstart_mode(const std::string& s) {
  if (s == "none") return WarmstartMode::none;
  if (s == "corollary") return WarmstartMode::corollary;
  if (s == "custom") return WarmstartMode::custom;
  throw ManifestError("unknown warmstart mode '" + s + "'");
}

inline std::string to_string(WarmstartMode m) {
  switch (m) {
    case WarmstartMode::none: return "none";
    case WarmstartMode::corollary: return "corollary";
    case WarmstartMode::custom: return "custom";
  }
  return "none";
}

inline ExperimentManifest manifest_from_json(const json& j,
                                             const std::string& base_dir = "") {
  if (!j.is_object()) throw ManifestError("manifest must be a JSON object");
  ExperimentManifest m;
  m.schema_version = detail::get_or<int>(j, "schema_version", kManifestSchemaVersion);
  if (m.schema_version != kManifestSchemaVersion) {
    throw ManifestError("unsupported manifest schema_version " +
                        std::to_string(m.schema_version));
  }
  m.potential_spec = json{{"potential", j.value("potential", "")},
                          {"dim", j.value("dim", json())},
                          {"params", j.value("params", json::object())}};
  m.potential = potential_from_json(j);

  const json sampler = j.value("sampler", json::object());
  m.sampler.terminal_time = detail::get_or<double>(sampler, "T", 1.0);
  if (sampler.contains("refresh_rate") && !sampler.at("refresh_rate").is_null()) {
    m.sampler.refresh_rate = detail::get_or<double>(sampler, "refresh_rate", 0.0);
  }
  m.sampler.record_events = detail::get_or<bool>(sampler, "record_events", false);
  m.sampler.max_events =
      detail::get_or<std::uint64_t>(sampler, "max_events", m.sampler.max_events);
  m.sampler.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
  try {
    m.sampler.validate();
  } catch (const std::invalid_argument& e) {
    throw ManifestError(std::string("sampler: ") + e.what());
  }

  if (j.contains("init")) m.init_spec = j.at("init");
  m.init = init_from_json(m.init_spec, base_dir);
  m.n_trajectories = detail::get_or<std::size_t>(
      j, "n_trajectories", detail::get_or<std::size_t>(j, "n_samples", 1));
  if (m.n_trajectories == 0) throw ManifestError("n_trajectories must be >= 1");

  const json ws = j.value("warmstart", json::object());
  m.warmstart_mode = parse_warmstart_mode(detail::get_or<std::string>(ws, "mode", "none"));
  if (m.warmstart_mode == WarmstartMode::custom) {
    LmcSchedule s;
    s.n_steps = detail::get_or<std::size_t>(ws, "N", 0);
    s.step_size = detail::get_or<double>(ws, "h", 0.0);
    s.init_cov_scale = detail::get_or<double>(ws, "init_variance", 0.0);
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ManifestError(std::string("warmstart: ") + e.what());
    }
    m.custom_schedule = s;
  }

  const json hy = j.value("hybrid", json::object());
  m.hybrid_epsilon = detail::get_or<double>(hy, "epsilon", m.hybrid_epsilon);
  m.hybrid_K = detail::get_or<double>(hy, "K", m.hybrid_K);

  for (const auto& c : j.value("checks", json::array())) {
    if (c.is_string()) {
      m.checks.push_back({c.get<std::string>(), json::object()});
    } else if (c.is_object() && c.contains("name")) {
      m.checks.push_back({c.at("name").get<std::string>(),
                          c.value("params", json::object())});
    } else {
      throw ManifestError("checks entries must be names or {name, params}");
    }
  }
  m.output_dir = detail::get_or<std::string>(j.value("output", json::object()), "dir", ".");
  return m;
}

inline ExperimentManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ManifestError("manifest parse error: " + std::string(e.what()));
  }
  const auto slash = path.find_last_of('/');
  return manifest_from_json(j, slash == std::string::npos ? "" : path.substr(0, slash));
}

/// Warm-start schedule the manifest asks for, if any.
inline std::optional<LmcSchedule> resolve_warmstart(const ExperimentManifest& m) {
  switch (m.warmstart_mode) {
    case WarmstartMode::none: return std::nullopt;
    case WarmstartMode::custom: return m.custom_schedule;
    case WarmstartMode::corollary:
      return std::visit(
          [](const auto& p) {
            try {
              return corollary_schedule(p.dim(), p.m(), p.L()).schedule;
            } catch (const std::exception& e) {
              throw ManifestError(std::string("warmstart: ") + e.what());
            }
          },
          m.potential);
  }
  return std::nullopt;
}

inline json to_json(const LmcSchedule& s) {
  return json{{"N", s.n_steps}, {"h", s.step_size}, {"init_variance", s.init_cov_scale}};
}

/// Canonical echo of a manifest (what was actually run).
inline json to_json(const ExperimentManifest& m) {
  json sampler{{"T", m.sampler.terminal_time},
               {"refresh_rate", m.sampler.refresh_rate ? json(*m.sampler.refresh_rate)
                                                       : json()},
               {"record_events", m.sampler.record_events},
               {"max_events", m.sampler.max_events}};
  json ws{{"mode", to_string(m.warmstart_mode)}};
  if (m.custom_schedule) ws.update(to_json(*m.custom_schedule));
  json checks = json::array();
  for (const auto& c : m.checks) checks.push_back({{"name", c.name}, {"params", c.params}});
  json out{{"schema_version", m.schema_version}};
  out.update(m.potential_spec);
  out["sampler"] = sampler;
  out["init"] = m.init_spec;
  out["n_trajectories"] = m.n_trajectories;
  out["seed"] = m.sampler.seed;
  out["warmstart"] = ws;
  out["hybrid"] = {{"epsilon", m.hybrid_epsilon}, {"K", m.hybrid_K}};
  out["checks"] = checks;
  return out;
}

}  // namespace zigzag
