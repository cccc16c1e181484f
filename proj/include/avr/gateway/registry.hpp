#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "avr/gateway/client.hpp"
#include "avr/gateway/mocks.hpp"
#include "avr/gateway/remote.hpp"

namespace avr::gateway {

/// One `models:` entry of the engine config.
struct ClientSpec {
  std::string name;
  /// "remote" or "mock".
  std::string backend = "remote";
  RemoteEndpoint endpoint;
  /// Mock used for backend=mock, and as the substitute under --mock.
  std::string mock_kind;
  nlohmann::json mock_params = nlohmann::json::object();
};

/// Mock kind substituted for `spec` under --mock when none is configured.
std::string default_mock_kind(const ClientSpec& spec);

ClientPtr make_client(const ClientSpec& spec, bool force_mock);

/// Named clients, built once and shared by every caller.
class ClientRegistry {
 public:
  ClientRegistry() = default;
  ClientRegistry(const std::vector<ClientSpec>& specs, bool force_mock);

  void add(std::string name, ClientPtr client);
  /// Throws ValidationError naming the known clients.
  ClientPtr get(const std::string& name) const;
  bool contains(const std::string& name) const { return clients_.count(name) > 0; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, ClientPtr> clients_;
};

}  // namespace avr::gateway
