#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ddt/harness.hpp"

namespace ddt {

/// A `section.key=value` override applied after the file is parsed.
struct ConfigOverride {
  std::string key;
  std::string value;
};

/// Parses "section.key=value". Throws ConfigError.
ConfigOverride parse_override(std::string_view text);

/// Parses the experiment config format (docs/config.md) and validates the
/// result. Unknown sections or keys are errors. Throws ConfigError.
ExperimentConfig parse_config(std::string_view text, const std::vector<ConfigOverride>& overrides = {});

/// Canonical JSON echo of a config; the key order is fixed.
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

/// 16 hex digits of FNV-1a over the canonical JSON echo.
std::string config_hash(const ExperimentConfig& cfg);

/// Bundled presets reproducing the matmul case studies.
const std::vector<std::string>& preset_names();
/// Config text of a preset. Throws ddt::Error listing valid names.
std::string_view preset_text(std::string_view name);

}  // namespace ddt
