#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace avr::io {

/// Whole file as bytes; throws ValidationError when unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes `<path>.partial`, flushes, then renames over `path`. Parent
/// directories are created. A crash leaves at most a `.partial` file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

inline constexpr std::string_view kPartialSuffix = ".partial";

}  // namespace avr::io
