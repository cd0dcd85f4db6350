#include "cmx/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace cmx::log {
namespace {

Level parse_env() {
  const char* v = std::getenv("CMX_LOG");
  if (v == nullptr) return Level::info;
  if (std::strcmp(v, "error") == 0) return Level::error;
  if (std::strcmp(v, "debug") == 0) return Level::debug;
  return Level::info;
}

std::atomic<Level> g_level{parse_env()};
std::mutex g_mutex;

void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[cmx %s] %s\n", tag, msg.c_str());
  std::fflush(stderr);
}

}  // namespace

Level level() { return g_level.load(); }
void set_level(Level lvl) { g_level.store(lvl); }

void error(const std::string& msg) {
  if (level() >= Level::error) emit("error", msg);
}

void info(const std::string& msg) {
  if (level() >= Level::info) emit("info", msg);
}

void debug(const std::string& msg) {
  if (level() >= Level::debug) emit("debug", msg);
}

}  // namespace cmx::log
