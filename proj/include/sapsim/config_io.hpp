#pragma once

#include <string>

#include "sapsim/config.hpp"

namespace sapsim {

// Sectioned key = value scenario file.  Unknown sections or keys are
// rejected; every accepted key is logged; all keys are optional.
SimConfig parse_config(const std::string& path);
SimConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

// Emit every section/key with the current values (17 significant digits).
// parse(serialize(cfg)) reproduces cfg.
std::string serialize_config(const SimConfig& cfg);

} // namespace sapsim
