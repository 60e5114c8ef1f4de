#pragma once

// Text form of NetworkConfig, one `key = value` per line, `#` starts a
// comment. Lists are comma separated:
//
//   backbone_widths = 16, 32, 64, 128, 128
//   decoder_width = 32
//   rates_L = 1, 2, 4, 8
//   lite = false
//
// Keys not present keep their defaults.

#include <filesystem>
#include <string>
#include <string_view>

#include "edn/model.hpp"

namespace edn {

// ConfigError naming the key on unknown keys, malformed values, repeated
// keys, or a result that fails validate().
NetworkConfig parse_run_config(std::string_view text);
NetworkConfig load_run_config(const std::filesystem::path& path);

// Every key, in a form parse_run_config reads back to `config`.
std::string format_run_config(const NetworkConfig& config);

}  // namespace edn
