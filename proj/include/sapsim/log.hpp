#pragma once

#include <string>

namespace sapsim::logging {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

void set_level(Level level);
Level level();
void info(const std::string& msg);
void debug(const std::string& msg);

} // namespace sapsim::logging
