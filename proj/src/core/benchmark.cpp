#include "avr/core/benchmark.hpp"

#include <cstdlib>
#include <set>

#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/core/kvtree.hpp"

namespace avr {

std::vector<ContentSpec> parse_benchmark(const std::string& text, const std::string& source_name) {
  const auto root = kv::parse(text, source_name);
  kv::check_schema(root, source_name);
  const auto entries = root["specs"];
  if (!entries || !entries.IsSequence()) throw ValidationError(source_name + ": 'specs' must be a list");

  Difficulty file_difficulty = Difficulty::easy_moderate;
  if (root["difficulty"]) file_difficulty = parse_difficulty(root["difficulty"].as<std::string>());

  std::vector<ContentSpec> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto where = source_name + " entry #" + std::to_string(i + 1);
    const auto& node = entries[i];
    if (!node.IsMap()) throw ValidationError(where + ": not a mapping");
    auto spec = kv::content_spec_from(node, where);
    if (!node["difficulty"]) spec.difficulty = file_difficulty;
    if (spec.id.empty()) throw ValidationError(where + ": empty id");
    if (spec.description.empty()) throw ValidationError(where + " (" + spec.id + "): empty description");
    if (!seen.insert(spec.id).second) throw ValidationError(where + ": duplicate id '" + spec.id + "'");
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<ContentSpec> load_benchmark(const std::filesystem::path& path) {
  return parse_benchmark(io::read_file(path), path.string());
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("AVR_DATA_DIR"); env && *env) return env;
  return AVR_DATA_DIR;
}

std::vector<ContentSpec> load_shipped_benchmarks(const std::optional<std::filesystem::path>& dir) {
  const auto base = (dir ? *dir : default_data_dir()) / "benchmarks";
  auto specs = load_benchmark(base / "easy_moderate.yaml");
  auto hard = load_benchmark(base / "hard.yaml");
  std::set<std::string> ids;
  for (const auto& s : specs) ids.insert(s.id);
  for (auto& s : hard) {
    if (!ids.insert(s.id).second) throw ValidationError("shipped benchmarks share id '" + s.id + "'");
    specs.push_back(std::move(s));
  }
  return specs;
}

std::optional<ContentSpec> find_spec(const std::vector<ContentSpec>& specs, const std::string& id) {
  for (const auto& s : specs)
    if (s.id == id) return s;
  return std::nullopt;
}

}  // namespace avr
