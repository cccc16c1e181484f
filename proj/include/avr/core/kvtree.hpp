#pragma once

// Human-readable key-value tree files (benchmarks, manifests, indexes,
// results). Backed by YAML; every document carries `schema: 1`.

#include <filesystem>
#include <string>

#include <yaml-cpp/yaml.h>

#include "avr/core/types.hpp"

namespace avr::kv {

inline constexpr int kSchemaVersion = 1;

/// Shortest text that round-trips to the same double.
std::string format_double(double value);

/// Block-style emission; stable for equal trees.
std::string emit(const YAML::Node& root);

YAML::Node parse(const std::string& text, const std::string& source_name);
YAML::Node load_file(const std::filesystem::path& path);

/// Throws ValidationError unless root["schema"] == kSchemaVersion.
void check_schema(const YAML::Node& root, const std::string& source_name);

/// Required scalar lookup with a descriptive error.
std::string require_string(const YAML::Node& node, const char* key, const std::string& where);

YAML::Node to_node(const ContentSpec& spec);
ContentSpec content_spec_from(const YAML::Node& node, const std::string& where);

YAML::Node to_node(const RecordOptions& opts);
RecordOptions record_options_from(const YAML::Node& node, RecordOptions defaults = {});

YAML::Node to_node(const RunConfig& config);
/// Keys absent from `node` keep the value from `defaults`.
RunConfig run_config_from(const YAML::Node& node, RunConfig defaults = {});

}  // namespace avr::kv
