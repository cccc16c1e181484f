#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avr/core/run_handle.hpp"
#include "avr/core/types.hpp"
#include "avr/gateway/client.hpp"

namespace avr::assetbank {

namespace fs = std::filesystem;

enum class AssetKind { image, audio, model3d, other };

inline constexpr std::array<AssetKind, 4> kAllKinds{AssetKind::image, AssetKind::audio, AssetKind::model3d,
                                                    AssetKind::other};

std::string_view to_string(AssetKind kind);
AssetKind parse_asset_kind(std::string_view token);

/// Fixed extension table (case-insensitive):
/// png jpg jpeg gif webp svg: image; wav mp3 ogg m4a: audio; glb gltf: model3d.
AssetKind kind_for_extension(const fs::path& path);

struct AssetMeta {
  std::optional<double> duration_s;
  std::optional<double> bpm;
  std::optional<int> width_px;
  std::optional<int> height_px;
  std::optional<std::vector<std::string>> animation_names;

  bool empty() const;
  bool operator==(const AssetMeta&) const = default;
};

struct AssetRecord {
  /// Pack-relative, forward slashes.
  std::string rel_path;
  AssetKind kind = AssetKind::other;
  AssetMeta meta;
  /// Set when the file could not be read or measured.
  std::string warning;

  bool operator==(const AssetRecord&) const = default;
};

struct Pack {
  std::string name;
  std::map<AssetKind, int> counts;
  std::vector<AssetRecord> assets;
  /// First line of a LICENSE/COPYING file in the pack, if any.
  std::string license_note;

  int total() const;
  const AssetRecord* find(std::string_view rel_path) const;
};

struct PackIndex {
  /// Directory holding the pack subdirectories; not serialized.
  fs::path root;
  std::vector<Pack> packs;

  const Pack* find(std::string_view name) const;
};

/// Image size from PNG, JPEG, GIF, WebP or SVG header bytes.
std::optional<std::array<int, 2>> image_dimensions(std::string_view bytes, AssetKind kind, std::string_view ext);
/// Duration of a PCM WAV from its header.
std::optional<double> wav_duration(std::string_view bytes);
/// Animation names from a .glb container or .gltf document.
std::optional<std::vector<std::string>> gltf_animation_names(std::string_view bytes, bool binary);
/// BPM from a `*_<N>bpm*` file name.
std::optional<double> bpm_from_name(std::string_view filename);

/// Classifies and measures one file. Never throws; failures become
/// kind=other with empty meta and a warning.
AssetRecord classify_file(const fs::path& pack_dir, const std::string& rel_path);

/// Indexes every pack subdirectory of `root`. Files are scanned on up to
/// `workers` threads; the result is sorted by pack and path.
PackIndex index_packs(const fs::path& root, std::size_t workers = 1);

inline constexpr const char* kIndexFile = "assetbank.index";

std::string serialize(const PackIndex& index);
PackIndex parse_index(const std::string& text, const std::string& source_name);
/// Writes `<root>/assetbank.index`.
fs::path save_index(const PackIndex& index);
PackIndex load_index(const fs::path& root);

struct AssetEntry {
  std::string pack_name;
  std::string rel_path;

  bool operator==(const AssetEntry&) const = default;
};

struct AssetSelection {
  std::vector<AssetEntry> entries;
  std::string tree_text;
};

inline constexpr std::size_t kMaxPacks = 5;
inline constexpr std::size_t kMaxAssets = 50;

/// Directory tree of the entries: one line per pack, directory and file.
std::string render_tree(const std::vector<AssetEntry>& entries);

struct PackChoice {
  std::vector<std::string> packs;
  bool fallback = false;
  std::vector<std::string> warnings;
};

std::string pack_prompt(const ContentSpec& spec, const PackIndex& index);
/// Pack names from a `PACKS:` reply line, known to the index, in reply order.
std::vector<std::string> parse_pack_reply(std::string_view reply, const PackIndex& index);
/// Top packs by asset count, ties by name.
std::vector<std::string> fallback_packs(const PackIndex& index);

PackChoice select_packs(const ContentSpec& spec, const PackIndex& index, gateway::ModelClient& coder,
                        const gateway::ChatContext& ctx, double temperature = 0.0, std::int64_t seed = 0);

std::string asset_prompt(const ContentSpec& spec, const PackIndex& index, const std::vector<std::string>& packs);

struct ParsedSelection {
  std::vector<AssetEntry> entries;
  std::vector<std::string> rejected;
};

/// Lines between `SELECTED:` and `END` of the form `pack/rel_path`. Entries
/// outside the chosen packs, unknown, duplicated or escaping the pack are
/// rejected; at most kMaxAssets are kept.
ParsedSelection parse_asset_reply(std::string_view reply, const PackIndex& index,
                                  const std::vector<std::string>& packs);

/// Asks the coder, parses, and copies each chosen file to
/// `assets/<pack>/<rel_path>` through `sink`. Throws RuntimeFailure when no
/// valid entry remains.
AssetSelection select_assets(const ContentSpec& spec, const PackIndex& index, const std::vector<std::string>& packs,
                             gateway::ModelClient& coder, const gateway::ChatContext& ctx, ArtifactSink& sink,
                             double temperature = 0.0, std::int64_t seed = 0);

}  // namespace avr::assetbank
