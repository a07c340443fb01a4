#pragma once

// JSON configuration documents for the scan, validate and pnd commands.
// The schema is described in docs/config.md.

#include <string>

#include <json.hpp>

#include "qgs/scan.hpp"

namespace qgs {

/// Overlays the fields present in j onto base. Unknown keys and wrongly
/// typed values throw ConfigError naming the key.
ScanConfig config_from_json(const nlohmann::json& j, ScanConfig base = default_scan_config());

/// Reads and parses a config file; errors carry the path.
ScanConfig load_config(const std::string& path);

nlohmann::json config_to_json(const ScanConfig& cfg);

OutputFormat parse_output_format(const std::string& s);
std::string to_string(OutputFormat f);

}  // namespace qgs
