#include "kgsumm/util/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace kgsumm::log {
namespace {

std::atomic<Level> g_level{Level::Warn};
std::atomic<std::size_t> g_warnings{0};
std::mutex g_mu;

void emit(Level lvl, const char* tag, std::string_view msg) {
  if (lvl < g_level.load()) return;
  std::lock_guard lock(g_mu);
  std::cerr << "[" << tag << "] " << msg << '\n';
}

}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level.load(); }

void info(std::string_view msg) { emit(Level::Info, "info", msg); }

void warn(std::string_view msg) {
  ++g_warnings;
  emit(Level::Warn, "warn", msg);
}

void error(std::string_view msg) { emit(Level::Error, "error", msg); }

std::size_t warning_count() { return g_warnings.load(); }
void reset_warning_count() { g_warnings = 0; }

}  // namespace kgsumm::log
