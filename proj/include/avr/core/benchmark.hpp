#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "avr/core/types.hpp"

namespace avr {

/// Parses and validates a benchmark file. Duplicate ids, unknown kinds and
/// empty descriptions raise ValidationError naming the entry.
std::vector<ContentSpec> load_benchmark(const std::filesystem::path& path);
std::vector<ContentSpec> parse_benchmark(const std::string& text, const std::string& source_name);

/// Directory holding the shipped benchmark files. `AVR_DATA_DIR` in the
/// environment overrides the compiled-in location.
std::filesystem::path default_data_dir();

/// Both shipped benchmarks: easy-moderate first, then hard.
std::vector<ContentSpec> load_shipped_benchmarks(const std::optional<std::filesystem::path>& dir = std::nullopt);

std::optional<ContentSpec> find_spec(const std::vector<ContentSpec>& specs, const std::string& id);

}  // namespace avr
