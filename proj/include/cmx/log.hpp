#pragma once

#include <string>

namespace cmx::log {

// Verbosity comes from the CMX_LOG environment variable: error, info or debug.
enum class Level { error = 0, info = 1, debug = 2 };

Level level();
void set_level(Level lvl);

void error(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace cmx::log
