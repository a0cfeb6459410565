#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "orsum/llm/backend.hpp"

namespace orsum::llm {

struct HttpBackendConfig {
  // Full URL of the chat-completions endpoint, e.g.
  // https://api.openai.com/v1/chat/completions
  std::string endpoint;
  // Name of the environment variable holding the bearer token; empty for
  // endpoints without auth.
  std::string api_key_env = "OPENAI_API_KEY";
  std::size_t max_in_flight = 4;
};

struct Url {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;

  std::string origin() const;
};

Url parse_url(const std::string& url);

class HttpBackend final : public ChatBackend {
public:
  explicit HttpBackend(HttpBackendConfig config);

  ChatReply complete(const ChatRequest& request) override;
  std::string describe() const override { return "http:" + config_.endpoint; }

  ConcurrencyGate& gate() noexcept { return *gate_; }

private:
  HttpBackendConfig config_;
  Url url_;
  std::string api_key_;
  std::shared_ptr<ConcurrencyGate> gate_;
};

// Extracts choices[0].message.content from a chat-completion response.
std::string parse_completion(const std::string& body);

}  // namespace orsum::llm
