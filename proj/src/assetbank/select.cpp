#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "avr/assetbank/assetbank.hpp"
#include "avr/core/criteria.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"

namespace avr::assetbank {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string describe_meta(const AssetRecord& a) {
  std::string out(to_string(a.kind));
  char buf[64];
  if (a.meta.width_px && a.meta.height_px) {
    std::snprintf(buf, sizeof buf, ", %dx%d", *a.meta.width_px, *a.meta.height_px);
    out += buf;
  }
  if (a.meta.duration_s) {
    std::snprintf(buf, sizeof buf, ", %.2f s", *a.meta.duration_s);
    out += buf;
  }
  if (a.meta.bpm) {
    std::snprintf(buf, sizeof buf, ", %g bpm", *a.meta.bpm);
    out += buf;
  }
  if (a.meta.animation_names) {
    out += ", animations: ";
    if (a.meta.animation_names->empty()) out += "none";
    for (std::size_t i = 0; i < a.meta.animation_names->size(); ++i)
      out += (i ? ", " : "") + (*a.meta.animation_names)[i];
  }
  return out;
}

// Strips list bullets, backticks and a trailing "(...)" annotation.
std::string clean_entry(std::string line) {
  line = trim(line);
  if (!line.empty() && (line[0] == '-' || line[0] == '*')) line = trim(std::string_view(line).substr(1));
  if (line.size() >= 2 && line.front() == '`' && line.back() == '`') line = line.substr(1, line.size() - 2);
  if (auto paren = line.find(" ("); paren != std::string::npos) line = trim(std::string_view(line).substr(0, paren));
  return line;
}

bool escapes(const fs::path& rel) {
  if (rel.empty() || rel.is_absolute() || rel.has_root_name()) return true;
  for (const auto& part : rel)
    if (part == "..") return true;
  return false;
}

bool inside(const fs::path& base, const fs::path& p) {
  auto b = base.begin();
  auto q = p.begin();
  for (; b != base.end(); ++b, ++q)
    if (q == p.end() || *b != *q) return false;
  return true;
}

}  // namespace

std::string render_tree(const std::vector<AssetEntry>& entries) {
  struct Node {
    std::map<std::string, Node> children;
    bool file = false;
  };
  Node root;
  for (const auto& e : entries) {
    Node* n = &root.children[e.pack_name];
    const fs::path rel(e.rel_path);
    for (const auto& part : rel) n = &n->children[part.string()];
    n->file = true;
  }
  std::string out = "assets/\n";
  auto walk = [&](auto&& self, const Node& node, const std::string& prefix) -> void {
    std::size_t i = 0;
    for (const auto& [name, child] : node.children) {
      const bool last = ++i == node.children.size();
      out += prefix + (last ? "└── " : "├── ") + name + (child.file ? "" : "/") + "\n";
      self(self, child, prefix + (last ? "    " : "│   "));
    }
  };
  walk(walk, root, "");
  return out;
}

std::string pack_prompt(const ContentSpec& spec, const PackIndex& index) {
  std::string p = "You are preparing assets for a " + std::string(content_type_word(spec.kind)) +
                  " that will be written as a single HTML file.\n";
  p += "Content id: " + spec.id + "\n";
  p += "Description: " + spec.full_description() + "\n\n";
  p += "Available asset packs with their number of files per type:\n";
  for (const auto& pack : index.packs) {
    p += "- " + pack.name + ":";
    for (auto k : kAllKinds) p += " " + std::string(to_string(k)) + "=" + std::to_string(pack.counts.at(k));
    p += "\n";
  }
  p += "\nChoose at most " + std::to_string(kMaxPacks) +
       " packs that suit this content. Answer with a single line in this form:\n"
       "PACKS: <pack name>, <pack name>, ...\n";
  return p;
}

std::vector<std::string> parse_pack_reply(std::string_view reply, const PackIndex& index) {
  std::vector<std::string> out;
  const auto lines = lines_of(reply);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    const auto line = trim(*it);
    const auto pos = line.find("PACKS:");
    if (pos == std::string::npos) continue;
    std::stringstream names(line.substr(pos + 6));
    std::string name;
    while (std::getline(names, name, ',')) {
      name = clean_entry(name);
      if (index.find(name) && std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
      if (out.size() == kMaxPacks) break;
    }
    break;
  }
  return out;
}

std::vector<std::string> fallback_packs(const PackIndex& index) {
  std::vector<const Pack*> order;
  for (const auto& p : index.packs) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const Pack* a, const Pack* b) {
    if (a->total() != b->total()) return a->total() > b->total();
    return a->name < b->name;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < order.size() && i < kMaxPacks; ++i) out.push_back(order[i]->name);
  return out;
}

PackChoice select_packs(const ContentSpec& spec, const PackIndex& index, gateway::ModelClient& coder,
                        const gateway::ChatContext& ctx, double temperature, std::int64_t seed) {
  if (index.packs.empty()) throw ValidationError("asset index has no packs");
  gateway::ChatRequest req{{gateway::Message::user(pack_prompt(spec, index))}, temperature, seed};
  const auto reply = gateway::chat(coder, req, ctx);
  PackChoice choice;
  choice.packs = parse_pack_reply(reply.text, index);
  if (choice.packs.empty()) {
    choice.packs = fallback_packs(index);
    choice.fallback = true;
    choice.warnings.push_back("pack reply named no indexed pack; using the largest packs");
  }
  return choice;
}

std::string asset_prompt(const ContentSpec& spec, const PackIndex& index, const std::vector<std::string>& packs) {
  std::string p = "You are preparing assets for a " + std::string(content_type_word(spec.kind)) +
                  " that will be written as a single HTML file.\n";
  p += "Content id: " + spec.id + "\n";
  p += "Description: " + spec.full_description() + "\n\n";
  p += "Assets in the chosen packs:\n";
  for (const auto& name : packs) {
    const auto* pack = index.find(name);
    if (!pack) continue;
    for (const auto& a : pack->assets) p += "- " + pack->name + "/" + a.rel_path + " (" + describe_meta(a) + ")\n";
  }
  p += "\nChoose at most " + std::to_string(kMaxAssets) +
       " assets to use. List one pack/path per line between a line containing only SELECTED: and a line "
       "containing only END, for example:\nSELECTED:\npack-name/path/to/file.png\nEND\n";
  return p;
}

ParsedSelection parse_asset_reply(std::string_view reply, const PackIndex& index,
                                  const std::vector<std::string>& packs) {
  ParsedSelection out;
  std::set<std::pair<std::string, std::string>> seen;
  bool inside_block = false;
  for (const auto& raw : lines_of(reply)) {
    const auto line = trim(raw);
    if (!inside_block) {
      if (line.rfind("SELECTED:", 0) == 0) inside_block = true;
      continue;
    }
    if (line == "END") break;
    const auto entry = clean_entry(line);
    if (entry.empty()) continue;
    const auto slash = entry.find('/');
    if (slash == std::string::npos) {
      out.rejected.push_back(entry + ": not of the form pack/path");
      continue;
    }
    const auto pack_name = entry.substr(0, slash);
    const auto rel = fs::path(entry.substr(slash + 1)).lexically_normal();
    if (pack_name == ".." || pack_name == "." || escapes(rel)) {
      out.rejected.push_back(entry + ": path escape");
      continue;
    }
    if (std::find(packs.begin(), packs.end(), pack_name) == packs.end()) {
      out.rejected.push_back(entry + ": pack not selected");
      continue;
    }
    const auto* pack = index.find(pack_name);
    const auto rel_s = rel.generic_string();
    if (!pack || !pack->find(rel_s)) {
      out.rejected.push_back(entry + ": not in the index");
      continue;
    }
    if (!seen.emplace(pack_name, rel_s).second) {
      out.rejected.push_back(entry + ": duplicate");
      continue;
    }
    if (out.entries.size() == kMaxAssets) {
      out.rejected.push_back(entry + ": over the limit of " + std::to_string(kMaxAssets));
      continue;
    }
    out.entries.push_back({pack_name, rel_s});
  }
  return out;
}

AssetSelection select_assets(const ContentSpec& spec, const PackIndex& index, const std::vector<std::string>& packs,
                             gateway::ModelClient& coder, const gateway::ChatContext& ctx, ArtifactSink& sink,
                             double temperature, std::int64_t seed) {
  for (const auto& p : packs)
    if (!index.find(p)) throw ValidationError("pack '" + p + "' is not in the index");
  gateway::ChatRequest req{{gateway::Message::user(asset_prompt(spec, index, packs))}, temperature, seed};
  const auto reply = gateway::chat(coder, req, ctx);
  auto parsed = parse_asset_reply(reply.text, index, packs);
  if (parsed.entries.empty())
    throw RuntimeFailure("asset selection reply contained no valid entry; retry or disable assets");

  const auto dest_root = (sink.root() / "assets").lexically_normal();
  for (const auto& e : parsed.entries) {
    const auto pack_dir = fs::weakly_canonical(index.root / e.pack_name);
    const auto source = fs::weakly_canonical(pack_dir / e.rel_path);
    const auto dest = (dest_root / e.pack_name / e.rel_path).lexically_normal();
    if (!inside(pack_dir, source) || !inside(dest_root, dest))
      throw ValidationError("asset " + e.pack_name + "/" + e.rel_path + " escapes its directory");
    sink.write(dest.lexically_relative(sink.root().lexically_normal()), io::read_file(source));
  }
  AssetSelection sel;
  sel.entries = std::move(parsed.entries);
  sel.tree_text = render_tree(sel.entries);
  return sel;
}

}  // namespace avr::assetbank
