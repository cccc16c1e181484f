#include <algorithm>
#include <cctype>
#include <cstring>
#include <regex>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "avr/assetbank/assetbank.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/media/media.hpp"

namespace avr::assetbank {

std::string_view to_string(AssetKind kind) {
  switch (kind) {
    case AssetKind::image:
      return "image";
    case AssetKind::audio:
      return "audio";
    case AssetKind::model3d:
      return "model3d";
    case AssetKind::other:
      return "other";
  }
  return "?";
}

AssetKind parse_asset_kind(std::string_view token) {
  for (auto k : kAllKinds)
    if (to_string(k) == token) return k;
  throw ValidationError("unknown asset kind '" + std::string(token) + "'");
}

namespace {

std::string lower_ext(const fs::path& p) {
  auto ext = p.extension().string();
  if (!ext.empty()) ext.erase(0, 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::uint32_t be32(std::string_view b, std::size_t at) {
  return (std::uint32_t(std::uint8_t(b[at])) << 24) | (std::uint32_t(std::uint8_t(b[at + 1])) << 16) |
         (std::uint32_t(std::uint8_t(b[at + 2])) << 8) | std::uint32_t(std::uint8_t(b[at + 3]));
}
std::uint16_t be16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>((std::uint8_t(b[at]) << 8) | std::uint8_t(b[at + 1]));
}
std::uint32_t le32(std::string_view b, std::size_t at) {
  return std::uint32_t(std::uint8_t(b[at])) | (std::uint32_t(std::uint8_t(b[at + 1])) << 8) |
         (std::uint32_t(std::uint8_t(b[at + 2])) << 16) | (std::uint32_t(std::uint8_t(b[at + 3])) << 24);
}
std::uint32_t le24(std::string_view b, std::size_t at) {
  return std::uint32_t(std::uint8_t(b[at])) | (std::uint32_t(std::uint8_t(b[at + 1])) << 8) |
         (std::uint32_t(std::uint8_t(b[at + 2])) << 16);
}
std::uint16_t le16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(std::uint8_t(b[at]) | (std::uint8_t(b[at + 1]) << 8));
}

std::optional<std::array<int, 2>> png_size(std::string_view b) {
  if (b.size() < 24 || b.substr(0, 8) != std::string_view("\x89PNG\r\n\x1a\n", 8) || b.substr(12, 4) != "IHDR")
    return std::nullopt;
  return std::array<int, 2>{static_cast<int>(be32(b, 16)), static_cast<int>(be32(b, 20))};
}

std::optional<std::array<int, 2>> gif_size(std::string_view b) {
  if (b.size() < 10 || (b.substr(0, 6) != "GIF87a" && b.substr(0, 6) != "GIF89a")) return std::nullopt;
  return std::array<int, 2>{le16(b, 6), le16(b, 8)};
}

std::optional<std::array<int, 2>> jpeg_size(std::string_view b) {
  if (b.size() < 4 || std::uint8_t(b[0]) != 0xFF || std::uint8_t(b[1]) != 0xD8) return std::nullopt;
  std::size_t i = 2;
  while (i + 9 < b.size()) {
    if (std::uint8_t(b[i]) != 0xFF) return std::nullopt;
    const std::uint8_t marker = std::uint8_t(b[i + 1]);
    if (marker == 0xFF) {
      ++i;
      continue;
    }
    if (marker == 0xD8 || marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) {
      i += 2;
      continue;
    }
    const auto len = be16(b, i + 2);
    const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
    if (sof) return std::array<int, 2>{be16(b, i + 7), be16(b, i + 5)};
    i += 2 + len;
  }
  return std::nullopt;
}

std::optional<std::array<int, 2>> webp_size(std::string_view b) {
  if (b.size() < 30 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WEBP") return std::nullopt;
  const auto chunk = b.substr(12, 4);
  if (chunk == "VP8 ") {
    return std::array<int, 2>{le16(b, 26) & 0x3FFF, le16(b, 28) & 0x3FFF};
  }
  if (chunk == "VP8L") {
    if (std::uint8_t(b[20]) != 0x2F) return std::nullopt;
    const auto bits = le32(b, 21);
    return std::array<int, 2>{static_cast<int>((bits & 0x3FFF) + 1), static_cast<int>(((bits >> 14) & 0x3FFF) + 1)};
  }
  if (chunk == "VP8X") {
    return std::array<int, 2>{static_cast<int>(le24(b, 24) + 1), static_cast<int>(le24(b, 27) + 1)};
  }
  return std::nullopt;
}

std::optional<std::array<int, 2>> svg_size(std::string_view b) {
  const std::string text(b.substr(0, std::min<std::size_t>(b.size(), 8192)));
  std::smatch m;
  static const std::regex tag(R"(<svg\b[^>]*>)", std::regex::icase);
  if (!std::regex_search(text, m, tag)) return std::nullopt;
  const std::string t = m.str();
  static const std::regex w(R"(\bwidth\s*=\s*["']\s*([0-9.]+)(px)?\s*["'])");
  static const std::regex h(R"(\bheight\s*=\s*["']\s*([0-9.]+)(px)?\s*["'])");
  static const std::regex vb(R"(\bviewBox\s*=\s*["']\s*[-0-9.]+[\s,]+[-0-9.]+[\s,]+([0-9.]+)[\s,]+([0-9.]+)\s*["'])");
  std::smatch mw, mh, mv;
  if (std::regex_search(t, mw, w) && std::regex_search(t, mh, h))
    return std::array<int, 2>{static_cast<int>(std::stod(mw[1])), static_cast<int>(std::stod(mh[1]))};
  if (std::regex_search(t, mv, vb))
    return std::array<int, 2>{static_cast<int>(std::stod(mv[1])), static_cast<int>(std::stod(mv[2]))};
  return std::nullopt;
}

std::optional<double> sidecar_bpm(const fs::path& file) {
  auto sidecar = file;
  sidecar += ".meta";
  if (!fs::exists(sidecar)) return std::nullopt;
  const auto node = YAML::LoadFile(sidecar.string());
  if (!node.IsMap() || !node["bpm"]) return std::nullopt;
  return node["bpm"].as<double>();
}

}  // namespace

bool AssetMeta::empty() const { return !duration_s && !bpm && !width_px && !height_px && !animation_names; }

AssetKind kind_for_extension(const fs::path& path) {
  const auto ext = lower_ext(path);
  if (ext == "png" || ext == "jpg" || ext == "jpeg" || ext == "gif" || ext == "webp" || ext == "svg")
    return AssetKind::image;
  if (ext == "wav" || ext == "mp3" || ext == "ogg" || ext == "m4a") return AssetKind::audio;
  if (ext == "glb" || ext == "gltf") return AssetKind::model3d;
  return AssetKind::other;
}

std::optional<std::array<int, 2>> image_dimensions(std::string_view bytes, AssetKind, std::string_view ext) {
  if (ext == "svg") return svg_size(bytes);
  if (auto s = png_size(bytes)) return s;
  if (auto s = jpeg_size(bytes)) return s;
  if (auto s = gif_size(bytes)) return s;
  return webp_size(bytes);
}

std::optional<double> wav_duration(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") return std::nullopt;
  std::size_t i = 12;
  std::uint32_t byte_rate = 0;
  while (i + 8 <= b.size()) {
    const auto id = b.substr(i, 4);
    const auto size = le32(b, i + 4);
    if (id == "fmt " && i + 16 <= b.size()) byte_rate = le32(b, i + 16);
    if (id == "data") {
      if (byte_rate == 0) return std::nullopt;
      const std::size_t available = b.size() - (i + 8);
      const std::size_t data = std::min<std::size_t>(size, available);
      return static_cast<double>(data) / byte_rate;
    }
    i += 8 + size + (size & 1);
  }
  return std::nullopt;
}

std::optional<std::vector<std::string>> gltf_animation_names(std::string_view b, bool binary) {
  std::string_view json_text = b;
  if (binary) {
    if (b.size() < 20 || b.substr(0, 4) != "glTF") return std::nullopt;
    const auto chunk_len = le32(b, 12);
    if (b.substr(16, 4) != "JSON" || 20 + static_cast<std::size_t>(chunk_len) > b.size()) return std::nullopt;
    json_text = b.substr(20, chunk_len);
  }
  const auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  std::vector<std::string> names;
  if (doc.contains("animations") && doc["animations"].is_array()) {
    int i = 0;
    for (const auto& a : doc["animations"]) {
      names.push_back(a.is_object() && a.contains("name") && a["name"].is_string() ? a["name"].get<std::string>()
                                                                                   : "animation_" + std::to_string(i));
      ++i;
    }
  }
  return names;
}

std::optional<double> bpm_from_name(std::string_view filename) {
  static const std::regex re(R"(_(\d+(?:\.\d+)?)bpm)", std::regex::icase);
  std::cmatch m;
  if (!std::regex_search(filename.begin(), filename.end(), m, re)) return std::nullopt;
  return std::stod(m[1].str());
}

AssetRecord classify_file(const fs::path& pack_dir, const std::string& rel_path) {
  AssetRecord rec;
  rec.rel_path = rel_path;
  const auto path = pack_dir / rel_path;
  const auto kind = kind_for_extension(path);
  const auto ext = lower_ext(path);
  if (kind == AssetKind::other) return rec;
  try {
    const auto bytes = io::read_file(path);
    AssetMeta meta;
    switch (kind) {
      case AssetKind::image: {
        const auto size = image_dimensions(bytes, kind, ext);
        if (!size) throw RuntimeFailure("unrecognized image header");
        meta.width_px = (*size)[0];
        meta.height_px = (*size)[1];
        break;
      }
      case AssetKind::audio: {
        if (ext == "wav")
          meta.duration_s = wav_duration(bytes);
        else
          meta.duration_s = media::container_duration(path);
        if (!meta.duration_s) throw RuntimeFailure("no duration in audio header");
        meta.bpm = bpm_from_name(path.filename().string());
        if (!meta.bpm) meta.bpm = sidecar_bpm(path);
        break;
      }
      case AssetKind::model3d: {
        meta.animation_names = gltf_animation_names(bytes, ext == "glb");
        if (!meta.animation_names) throw RuntimeFailure("unreadable scene metadata");
        break;
      }
      case AssetKind::other:
        break;
    }
    rec.kind = kind;
    rec.meta = std::move(meta);
  } catch (const std::exception& e) {
    rec.kind = AssetKind::other;
    rec.meta = {};
    rec.warning = e.what();
  }
  return rec;
}

}  // namespace avr::assetbank
