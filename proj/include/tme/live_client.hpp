#pragma once

// Network-backed model client speaking the common chat-completions JSON
// shape. Configuration comes from the environment:
//   TME_LIVE_ENDPOINT  e.g. http://localhost:8080
//   TME_LIVE_API_KEY   bearer token (optional)
//   TME_LIVE_MODEL     model name sent with each request
// Registered by the CLI only when TME_LIVE_ENDPOINT is set; never used by
// tests. Kept in its own header so library consumers do not pay for the
// HTTP dependency.

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "tme/error.hpp"
#include "tme/session.hpp"

namespace tme {

class LiveHttpClient final : public ModelClient {
 public:
  LiveHttpClient(std::string endpoint, std::string api_key, std::string model)
      : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), model_(std::move(model)) {}

  static std::unique_ptr<LiveHttpClient> from_environment() {
    const char* endpoint = std::getenv("TME_LIVE_ENDPOINT");
    if (!endpoint || !*endpoint) return nullptr;
    const char* key = std::getenv("TME_LIVE_API_KEY");
    const char* model = std::getenv("TME_LIVE_MODEL");
    return std::make_unique<LiveHttpClient>(endpoint, key ? key : "",
                                            model && *model ? model : "default");
  }

  std::string complete(const PromptTranscript& prompt) override {
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    for (const Turn& turn : prompt.turns)
      messages.push_back({{"role", to_string(turn.role)}, {"content", turn.text}});
    nlohmann::ordered_json body{{"model", model_}, {"messages", messages}};

    httplib::Client http(endpoint_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = http.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res)
      fail(ErrorCode::illegal_state, "live client: no response from " + endpoint_);
    if (res->status != 200)
      fail(ErrorCode::illegal_state,
           "live client: HTTP " + std::to_string(res->status) + " from " + endpoint_);
    try {
      auto doc = nlohmann::ordered_json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      fail(ErrorCode::illegal_state, std::string("live client: bad response: ") + e.what());
    }
  }

  std::string name() const override { return "live"; }

 private:
  std::string endpoint_;
  std::string api_key_;
  std::string model_;
};

// Adds the "live" client to the registry when the environment names an
// endpoint. Returns true if registered.
inline bool register_live_client() {
  if (!LiveHttpClient::from_environment()) return false;
  client_registry()["live"] = [](const std::vector<std::string>&) {
    auto client = LiveHttpClient::from_environment();
    if (!client) fail(ErrorCode::illegal_state, "TME_LIVE_ENDPOINT is not set");
    return client;
  };
  return true;
}

}  // namespace tme
