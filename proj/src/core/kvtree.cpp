#include "avr/core/kvtree.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "avr/core/errors.hpp"

namespace avr::kv {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("format_double failed");
  std::string out(buf, end);
  // Keep a decimal point so readers never mistake the value for an integer.
  if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
  return out;
}

std::string emit(const YAML::Node& root) {
  YAML::Emitter out;
  out.SetIndent(2);
  out << root;
  std::string text = out.c_str();
  text += '\n';
  return text;
}

YAML::Node parse(const std::string& text, const std::string& source_name) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(source_name + ": parse error: " + e.what());
  }
}

YAML::Node load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void check_schema(const YAML::Node& root, const std::string& source_name) {
  if (!root.IsMap() || !root["schema"])
    throw ValidationError(source_name + ": missing 'schema' field");
  int version = 0;
  try {
    version = root["schema"].as<int>();
  } catch (const YAML::Exception&) {
    throw ValidationError(source_name + ": 'schema' is not an integer");
  }
  if (version != kSchemaVersion)
    throw ValidationError(source_name + ": unsupported schema " + std::to_string(version));
}

std::string require_string(const YAML::Node& node, const char* key, const std::string& where) {
  const auto v = node[key];
  if (!v || !v.IsScalar()) throw ValidationError(where + ": missing '" + key + "'");
  return v.as<std::string>();
}

YAML::Node to_node(const ContentSpec& spec) {
  YAML::Node n;
  n["id"] = spec.id;
  n["kind"] = std::string(to_string(spec.kind));
  n["title"] = spec.title;
  n["description"] = spec.description;
  n["difficulty"] = std::string(to_string(spec.difficulty));
  return n;
}

ContentSpec content_spec_from(const YAML::Node& node, const std::string& where) {
  ContentSpec spec;
  spec.id = require_string(node, "id", where);
  const auto w = where + " (" + spec.id + ")";
  try {
    spec.kind = parse_content_kind(require_string(node, "kind", w));
    if (node["difficulty"]) spec.difficulty = parse_difficulty(node["difficulty"].as<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError(w + ": " + e.what());
  }
  spec.title = node["title"] ? node["title"].as<std::string>() : std::string{};
  spec.description = node["description"] ? node["description"].as<std::string>() : std::string{};
  return spec;
}

namespace {

template <typename T>
void read(const YAML::Node& node, const char* key, T& dst) {
  if (const auto v = node[key]) {
    try {
      dst = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ValidationError(std::string("bad value for '") + key + "'");
    }
  }
}

}  // namespace

YAML::Node to_node(const RecordOptions& o) {
  YAML::Node n;
  n["duration_s"] = format_double(o.duration_s);
  n["fps"] = o.fps;
  n["width_px"] = o.width_px;
  n["height_px"] = o.height_px;
  n["audio_sample_rate_hz"] = o.audio_sample_rate_hz;
  n["start_wait_ms"] = o.start_wait_ms;
  n["load_timeout_ms"] = o.load_timeout_ms;
  return n;
}

RecordOptions record_options_from(const YAML::Node& node, RecordOptions o) {
  if (!node) return o;
  read(node, "duration_s", o.duration_s);
  read(node, "fps", o.fps);
  read(node, "width_px", o.width_px);
  read(node, "height_px", o.height_px);
  read(node, "audio_sample_rate_hz", o.audio_sample_rate_hz);
  read(node, "start_wait_ms", o.start_wait_ms);
  read(node, "load_timeout_ms", o.load_timeout_ms);
  return o;
}

YAML::Node to_node(const RunConfig& c) {
  YAML::Node n;
  n["coder_model"] = c.coder_model;
  n["omni_model"] = c.omni_model;
  n["reviewer_model"] = c.reviewer_model;
  n["k_initial"] = c.k_initial;
  n["improve_iters"] = c.improve_iters;
  n["with_assets"] = c.with_assets;
  n["with_feedback"] = c.with_feedback;
  n["omni_direct"] = c.omni_direct;
  n["error_fix_budget"] = c.error_fix_budget;
  n["record"] = to_node(c.record_opts);
  n["gen_temperature"] = format_double(c.gen_temperature);
  n["improve_temperature"] = format_double(c.improve_temperature);
  n["eval_temperature"] = format_double(c.eval_temperature);
  n["seed"] = c.seed;
  return n;
}

RunConfig run_config_from(const YAML::Node& node, RunConfig c) {
  if (!node) return c;
  read(node, "coder_model", c.coder_model);
  read(node, "omni_model", c.omni_model);
  read(node, "reviewer_model", c.reviewer_model);
  read(node, "k_initial", c.k_initial);
  read(node, "improve_iters", c.improve_iters);
  read(node, "with_assets", c.with_assets);
  read(node, "with_feedback", c.with_feedback);
  read(node, "omni_direct", c.omni_direct);
  read(node, "error_fix_budget", c.error_fix_budget);
  c.record_opts = record_options_from(node["record"], c.record_opts);
  read(node, "gen_temperature", c.gen_temperature);
  read(node, "improve_temperature", c.improve_temperature);
  read(node, "eval_temperature", c.eval_temperature);
  read(node, "seed", c.seed);
  return c;
}

}  // namespace avr::kv
