#pragma once

// stderr logger; level from PDMP_ZIGZAG_LOG (trace, debug, info, warn, error,
// off). Defaults to warn.

#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace zigzag {

inline std::shared_ptr<spdlog::logger> logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto lg = spdlog::stderr_color_mt("pdmp-zigzag");
    lg->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    const char* env = std::getenv("PDMP_ZIGZAG_LOG");
    lg->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return lg;
  }();
  return instance;
}

}  // namespace zigzag
