#pragma once

// File formats: samples.csv, events_<k>.jsonl, stats.json, reports.json/csv.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "zigzag/diagnostics.hpp"
#include "zigzag/sampler.hpp"

namespace zigzag {

using json = nlohmann::ordered_json;

/// JSON has no infinities; they are written as the strings "inf" / "-inf".
inline json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json();
  return json(v);
}

/// Header x1,...,xd then one row per draw; shortest round-trip formatting.
inline void write_samples_csv(std::ostream& out, std::span<const Point> rows) {
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  for (std::size_t i = 0; i < d; ++i) out << (i ? "," : "") << "x" << (i + 1);
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << fmt::format("{}", row[i]);
    }
    out << '\n';
  }
}

inline json to_json(const EventRecord& e) {
  json j;
  j["t"] = e.time;
  j["kind"] = std::string(to_string(e.kind));
  j["j"] = e.coordinate ? json(*e.coordinate) : json();
  j["ratio"] = e.thinning_ratio ? json(*e.thinning_ratio) : json();
  j["xnorm"] = e.position_norm;
  return j;
}

inline EventRecord event_from_json(const json& j) {
  EventRecord e;
  e.time = j.at("t").get<double>();
  const auto kind = parse_event_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown event kind");
  e.kind = *kind;
  if (j.contains("j") && !j.at("j").is_null()) e.coordinate = j.at("j").get<std::size_t>();
  if (j.contains("ratio") && !j.at("ratio").is_null()) {
    e.thinning_ratio = j.at("ratio").get<double>();
  }
  e.position_norm = j.at("xnorm").get<double>();
  return e;
}

inline void write_events_jsonl(std::ostream& out, std::span<const EventRecord> events) {
  for (const auto& e : events) out << to_json(e).dump() << '\n';
}

inline json to_json(const RunStats& s) {
  return json{{"n_trajectories", s.n_trajectories},
              {"n_refresh", s.n_refresh},
              {"n_proposed", s.n_proposed},
              {"n_accepted", s.n_accepted},
              {"n_partial_evals", s.n_partial_evals},
              {"n_clock_draws", s.n_clock_draws},
              {"sup_U", s.sup_U},
              {"sup_xnorm", s.sup_xnorm},
              {"xi", s.xi},
              {"sum_ratio", s.sum_ratio},
              {"mean_ratio", s.mean_ratio()},
              {"max_ratio", s.max_ratio}};
}

inline json to_json(const diagnostics::CheckReport& r) {
  json stats = json::array();
  for (const auto& s : r.statistics) {
    stats.push_back({{"name", s.name},
                     {"observed", number_json(s.observed)},
                     {"target", number_json(s.target)},
                     {"lower", number_json(s.lower)},
                     {"upper", number_json(s.upper)},
                     {"standard_error", s.standard_error ? number_json(*s.standard_error)
                                                         : json()},
                     {"pass", s.pass}});
  }
  return json{{"name", r.name},
              {"pass", r.pass},
              {"n_samples", r.n_samples},
              {"statistics", stats},
              {"notes", r.notes}};
}

/// check,statistic,observed,target,pass
inline void write_reports_csv(std::ostream& out,
                              std::span<const diagnostics::CheckReport> reports) {
  out << "check,statistic,observed,target,pass\n";
  for (const auto& r : reports) {
    for (const auto& s : r.statistics) {
      out << r.name << ',' << s.name << ',' << fmt::format("{}", s.observed) << ','
          << fmt::format("{}", s.target) << ',' << (s.pass ? "true" : "false") << '\n';
    }
  }
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace zigzag
