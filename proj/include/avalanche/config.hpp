// Flat key=value configuration: parsing, defaults, override precedence
// (defaults < file < command-line), and the canonical effective-config echo.

#ifndef AVALANCHE_CONFIG_HPP
#define AVALANCHE_CONFIG_HPP

#include <map>
#include <string>

#include "avalanche/market.hpp"

namespace avalanche::config {

using KeyValues = std::map<std::string, std::string>;

/// Parse `key = value` lines; '#' starts a comment, blank lines ignored.
KeyValues parse_kv_text(const std::string& text);
KeyValues parse_kv_file(const std::string& path);

/// Apply one `key=value` override (command-line form).
void apply_override(KeyValues& kv, const std::string& assignment);

/// Build a simulation config from key-values over the defaults. Unknown
/// keys are rejected; all values are validated before any computation.
market::SimConfig sim_config_from(const KeyValues& kv);

/// Dump every effective key of a config (the reproducibility echo).
KeyValues to_kv(const market::SimConfig& config);

/// Render sorted `key = value` lines.
std::string render_kv(const KeyValues& kv);

}  // namespace avalanche::config

#endif  // AVALANCHE_CONFIG_HPP
