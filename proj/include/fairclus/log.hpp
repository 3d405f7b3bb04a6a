#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace fairclus::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// FAIRCLUS_LOG = error | warn | info | debug (default warn).
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("FAIRCLUS_LOG");
    const std::string_view v = env ? env : "";
    if (v == "error") return Level::Error;
    if (v == "info") return Level::Info;
    if (v == "debug") return Level::Debug;
    return Level::Warn;
  }();
  return level;
}

inline bool enabled(Level l) { return static_cast<int>(l) <= static_cast<int>(threshold()); }

inline void write(Level l, std::string_view msg) {
  if (!enabled(l)) return;
  static std::mutex mu;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard lock(mu);
  std::cerr << "[fairclus " << names[static_cast<int>(l)] << "] " << msg << "\n";
}

inline void error(std::string_view msg) { write(Level::Error, msg); }
inline void warn(std::string_view msg) { write(Level::Warn, msg); }
inline void info(std::string_view msg) { write(Level::Info, msg); }
inline void debug(std::string_view msg) { write(Level::Debug, msg); }

}  // namespace fairclus::log
