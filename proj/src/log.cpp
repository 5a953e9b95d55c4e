#include "sapsim/log.hpp"

#include <cstdio>

namespace sapsim::logging {

namespace {
Level g_level = Level::Info;
}

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void info(const std::string& msg) {
    if (g_level >= Level::Info) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

void debug(const std::string& msg) {
    if (g_level >= Level::Debug) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

} // namespace sapsim::logging
