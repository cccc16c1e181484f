#include "avr/gateway/registry.hpp"

namespace avr::gateway {

std::string default_mock_kind(const ClientSpec& spec) {
  if (!spec.mock_kind.empty()) return spec.mock_kind;
  return spec.endpoint.capability == Capability::omni ? "heuristic_judge" : "template_coder";
}

ClientPtr make_client(const ClientSpec& spec, bool force_mock) {
  if (spec.backend == "mock" || force_mock) {
    auto params = spec.mock_params.is_object() ? spec.mock_params : nlohmann::json::object();
    if (!params.contains("name")) params["name"] = spec.name;
    return make_mock(default_mock_kind(spec), params);
  }
  if (spec.backend != "remote")
    throw ValidationError("model '" + spec.name + "': unknown backend '" + spec.backend + "' (expected remote|mock)");
  if (spec.endpoint.base_url.empty()) throw ValidationError("model '" + spec.name + "': base_url is required");
  if (spec.endpoint.model.empty()) throw ValidationError("model '" + spec.name + "': model is required");
  auto endpoint = spec.endpoint;
  endpoint.name = spec.name;
  return std::make_shared<OpenAICompatClient>(std::move(endpoint));
}

ClientRegistry::ClientRegistry(const std::vector<ClientSpec>& specs, bool force_mock) {
  for (const auto& s : specs) add(s.name, make_client(s, force_mock));
}

void ClientRegistry::add(std::string name, ClientPtr client) {
  if (!client) throw ValidationError("model '" + name + "': null client");
  if (!clients_.emplace(name, std::move(client)).second)
    throw ValidationError("model '" + name + "' is defined twice");
}

ClientPtr ClientRegistry::get(const std::string& name) const {
  if (auto it = clients_.find(name); it != clients_.end()) return it->second;
  std::string known;
  for (const auto& [n, c] : clients_) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown model '" + name + "' (configured: " + (known.empty() ? "none" : known) + ")");
}

std::vector<std::string> ClientRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [n, c] : clients_) out.push_back(n);
  return out;
}

}  // namespace avr::gateway
