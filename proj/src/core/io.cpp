#include "avr/core/io.hpp"

#include <fstream>
#include <sstream>

#include "avr/core/errors.hpp"

namespace avr::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += kPartialSuffix;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw RuntimeFailure("short write to " + path.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw RuntimeFailure("cannot move " + tmp.string() + " into place: " + ec.message());
}

}  // namespace avr::io
