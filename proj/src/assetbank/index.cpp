#include <algorithm>
#include <fstream>

#include <spdlog/spdlog.h>

#include "avr/assetbank/assetbank.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/core/kvtree.hpp"
#include "avr/core/parallel.hpp"

namespace avr::assetbank {

int Pack::total() const {
  int n = 0;
  for (const auto& [k, c] : counts) n += c;
  return n;
}

const AssetRecord* Pack::find(std::string_view rel_path) const {
  auto it = std::lower_bound(assets.begin(), assets.end(), rel_path,
                             [](const AssetRecord& a, std::string_view p) { return a.rel_path < p; });
  return it != assets.end() && it->rel_path == rel_path ? &*it : nullptr;
}

const Pack* PackIndex::find(std::string_view name) const {
  for (const auto& p : packs)
    if (p.name == name) return &p;
  return nullptr;
}

namespace {

bool is_sidecar(const fs::path& p) {
  if (p.extension() != ".meta") return false;
  auto base = p;
  base.replace_extension();
  return fs::exists(base);
}

std::string license_note(const fs::path& dir) {
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    if (name.rfind("LICENSE", 0) != 0 && name.rfind("LICENCE", 0) != 0 && name.rfind("COPYING", 0) != 0) continue;
    std::ifstream in(entry.path());
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty()) return line;
    }
  }
  return {};
}

}  // namespace

PackIndex index_packs(const fs::path& root, std::size_t workers) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw ValidationError("asset root " + root.string() + " is not a readable directory");
  PackIndex index;
  index.root = root;

  std::vector<fs::path> pack_dirs;
  for (const auto& entry : fs::directory_iterator(root, ec))
    if (entry.is_directory()) pack_dirs.push_back(entry.path());
  if (ec) throw ValidationError("cannot read asset root " + root.string() + ": " + ec.message());
  std::sort(pack_dirs.begin(), pack_dirs.end());

  for (const auto& dir : pack_dirs) {
    Pack pack;
    pack.name = dir.filename().string();
    pack.license_note = license_note(dir);
    std::vector<std::string> files;
    for (auto it = fs::recursive_directory_iterator(dir, fs::directory_options::skip_permission_denied, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (ec) {
        spdlog::warn("{}: {}", dir.string(), ec.message());
        ec.clear();
        continue;
      }
      if (!it->is_regular_file() || is_sidecar(it->path())) continue;
      files.push_back(it->path().lexically_relative(dir).generic_string());
    }
    std::sort(files.begin(), files.end());
    pack.assets.resize(files.size());
    parallel_for(files.size(), workers, [&](std::size_t i) { pack.assets[i] = classify_file(dir, files[i]); });
    for (auto k : kAllKinds) pack.counts[k] = 0;
    for (const auto& a : pack.assets) {
      ++pack.counts[a.kind];
      if (!a.warning.empty()) spdlog::warn("{}/{}: {}", pack.name, a.rel_path, a.warning);
    }
    index.packs.push_back(std::move(pack));
  }
  return index;
}

std::string serialize(const PackIndex& index) {
  YAML::Node root;
  root["schema"] = kv::kSchemaVersion;
  YAML::Node packs(YAML::NodeType::Sequence);
  for (const auto& p : index.packs) {
    YAML::Node pn;
    pn["name"] = p.name;
    if (!p.license_note.empty()) pn["license"] = p.license_note;
    YAML::Node counts;
    for (auto k : kAllKinds) counts[std::string(to_string(k))] = p.counts.count(k) ? p.counts.at(k) : 0;
    pn["counts"] = counts;
    YAML::Node assets(YAML::NodeType::Sequence);
    for (const auto& a : p.assets) {
      YAML::Node an;
      an["path"] = a.rel_path;
      an["kind"] = std::string(to_string(a.kind));
      if (a.meta.duration_s) an["duration_s"] = kv::format_double(*a.meta.duration_s);
      if (a.meta.bpm) an["bpm"] = kv::format_double(*a.meta.bpm);
      if (a.meta.width_px) an["width_px"] = *a.meta.width_px;
      if (a.meta.height_px) an["height_px"] = *a.meta.height_px;
      if (a.meta.animation_names) {
        YAML::Node names(YAML::NodeType::Sequence);
        for (const auto& n : *a.meta.animation_names) names.push_back(n);
        an["animation_names"] = names;
      }
      if (!a.warning.empty()) an["warning"] = a.warning;
      assets.push_back(an);
    }
    pn["assets"] = assets;
    packs.push_back(pn);
  }
  root["packs"] = packs;
  return kv::emit(root);
}

PackIndex parse_index(const std::string& text, const std::string& source_name) {
  const auto root = kv::parse(text, source_name);
  kv::check_schema(root, source_name);
  PackIndex index;
  const auto packs = root["packs"];
  if (!packs || !packs.IsSequence()) throw ValidationError(source_name + ": missing 'packs' list");
  try {
    for (const auto& pn : packs) {
      Pack p;
      p.name = kv::require_string(pn, "name", source_name);
      if (pn["license"]) p.license_note = pn["license"].as<std::string>();
      for (auto k : kAllKinds) p.counts[k] = 0;
      for (const auto& an : pn["assets"]) {
        AssetRecord a;
        a.rel_path = kv::require_string(an, "path", source_name + " (" + p.name + ")");
        a.kind = parse_asset_kind(kv::require_string(an, "kind", source_name));
        if (an["duration_s"]) a.meta.duration_s = an["duration_s"].as<double>();
        if (an["bpm"]) a.meta.bpm = an["bpm"].as<double>();
        if (an["width_px"]) a.meta.width_px = an["width_px"].as<int>();
        if (an["height_px"]) a.meta.height_px = an["height_px"].as<int>();
        if (an["animation_names"]) a.meta.animation_names = an["animation_names"].as<std::vector<std::string>>();
        if (an["warning"]) a.warning = an["warning"].as<std::string>();
        ++p.counts[a.kind];
        p.assets.push_back(std::move(a));
      }
      std::sort(p.assets.begin(), p.assets.end(),
                [](const AssetRecord& x, const AssetRecord& y) { return x.rel_path < y.rel_path; });
      index.packs.push_back(std::move(p));
    }
  } catch (const YAML::Exception& e) {
    throw ValidationError(source_name + ": " + e.what());
  }
  return index;
}

fs::path save_index(const PackIndex& index) {
  const auto path = index.root / kIndexFile;
  io::write_file_atomic(path, serialize(index));
  return path;
}

PackIndex load_index(const fs::path& root) {
  const auto path = root / kIndexFile;
  auto index = parse_index(io::read_file(path), path.string());
  index.root = root;
  return index;
}

}  // namespace avr::assetbank
