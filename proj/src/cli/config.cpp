#include "avr/cli/cli.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/core/kvtree.hpp"

namespace avr::cli {

nlohmann::json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      auto arr = nlohmann::json::array();
      for (const auto& x : node) arr.push_back(yaml_to_json(x));
      return arr;
    }
    case YAML::NodeType::Map: {
      auto obj = nlohmann::json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const auto s = node.Scalar();
  if (node.Tag() == "!") return s;
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  try {
    std::size_t used = 0;
    const long long i = std::stoll(s, &used);
    if (used == s.size()) return i;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  return s;
}

namespace {

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError(where + ": bad value for '" + key + "'");
  }
}

gateway::ClientSpec client_spec_from(const YAML::Node& n, const std::string& where) {
  gateway::ClientSpec s;
  s.name = kv::require_string(n, "name", where);
  const auto at = where + " model '" + s.name + "'";
  read(n, "backend", s.backend, at);
  if (s.backend != "remote" && s.backend != "mock")
    throw ValidationError(at + ": backend must be remote or mock");
  auto& e = s.endpoint;
  e.name = s.name;
  std::string capability = "text_only";
  read(n, "capability", capability, at);
  e.capability = gateway::parse_capability(capability);
  read(n, "base_url", e.base_url, at);
  read(n, "model", e.model, at);
  read(n, "token_env", e.token_env, at);
  read(n, "max_prompt_tokens", e.limits.max_prompt_tokens, at);
  read(n, "max_reply_tokens", e.limits.max_reply_tokens, at);
  read(n, "requests_per_min", e.limits.requests_per_min, at);
  read(n, "media_fps", e.media_fps, at);
  read(n, "media_sample_rate_hz", e.media_sample_rate_hz, at);
  read(n, "timeout_s", e.timeout_s, at);
  read(n, "mock_kind", s.mock_kind, at);
  if (n["mock_params"]) s.mock_params = yaml_to_json(n["mock_params"]);
  if (!s.mock_params.is_object()) throw ValidationError(at + ": mock_params must be a map");
  if (s.backend == "remote" && e.base_url.empty()) throw ValidationError(at + ": remote backend needs base_url");
  return s;
}

}  // namespace

EngineConfig parse_config(const std::string& text, const std::string& source_name, const fs::path& base_dir) {
  const auto root = kv::parse(text, source_name);
  kv::check_schema(root, source_name);
  EngineConfig c;
  c.base_dir = base_dir;
  if (const auto models = root["models"]) {
    if (!models.IsSequence()) throw ValidationError(source_name + ": models must be a list");
    for (const auto& m : models) c.models.push_back(client_spec_from(m, source_name));
  }
  c.run = kv::run_config_from(root["run"]);
  validate(c.run);
  if (const auto ev = root["eval"]) {
    std::string mode = "full";
    read(ev, "mode", mode, source_name);
    c.eval_mode = evaluator::parse_mode(mode);
  }
  if (const auto rec = root["recorder"]) {
    read(rec, "kind", c.recorder.kind, source_name);
    std::string exe, shim;
    read(rec, "executable", exe, source_name);
    read(rec, "shim_js", shim, source_name);
    if (!exe.empty()) c.recorder.browser.executable = base_dir / exe;
    if (!shim.empty()) c.recorder.browser.shim_js = base_dir / shim;
    read(rec, "pool_size", c.recorder.browser.pool_size, source_name);
  }
  if (c.recorder.kind != "auto" && c.recorder.kind != "simulated" && c.recorder.kind != "browser")
    throw ValidationError(source_name + ": recorder kind must be auto, simulated or browser");
  if (const auto ex = root["experiment"]) {
    read(ex, "models", c.experiment.models, source_name);
    read(ex, "specs", c.experiment.specs, source_name);
    read(ex, "settings", c.experiment.settings, source_name);
    read(ex, "k_best", c.experiment.k_best, source_name);
    std::string assets;
    read(ex, "asset_root", assets, source_name);
    if (!assets.empty()) c.experiment.asset_root = base_dir / assets;
    for (int s : c.experiment.settings)
      if (s < 0 || s > 7) throw ValidationError(source_name + ": settings are 0..7");
    if (c.experiment.k_best < 2) throw ValidationError(source_name + ": k_best must be at least 2");
  }
  return c;
}

EngineConfig load_config(const fs::path& path) {
  return parse_config(io::read_file(path), path.string(), path.parent_path());
}

gateway::ClientRegistry build_registry(const EngineConfig& config, bool mock) {
  gateway::ClientRegistry reg(config.models, mock);
  if (mock) {
    auto ensure = [&](const std::string& name, const char* kind) {
      if (name.empty() || reg.contains(name)) return;
      reg.add(name, gateway::make_mock(kind, {{"name", name}}));
    };
    ensure(config.run.coder_model.empty() ? "coder" : config.run.coder_model, "template_coder");
    ensure(config.run.omni_model.empty() ? "omni" : config.run.omni_model, "heuristic_judge");
    ensure(config.run.reviewer_model, "heuristic_judge");
    for (const auto& m : config.experiment.models) ensure(m, "template_coder");
  }
  return reg;
}

recorder::RecorderPtr build_recorder(const EngineConfig& config, bool /*mock*/) {
  return recorder::make_recorder(config.recorder.kind, config.recorder.browser);
}

}  // namespace avr::cli
