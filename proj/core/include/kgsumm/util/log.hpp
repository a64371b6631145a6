#pragma once

#include <string_view>

namespace kgsumm::log {

enum class Level { Debug, Info, Warn, Error, Off };

void set_level(Level level);
Level level();

void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

// Number of warnings emitted since start-up (or the last reset).
std::size_t warning_count();
void reset_warning_count();

}  // namespace kgsumm::log
