#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "orsum/llm/backend.hpp"

namespace orsum::llm {

class ScriptError : public Error {
public:
  using Error::Error;
};

// The outgoing message did not contain the entry's expected substring.
class ScriptMismatch : public ScriptError {
public:
  using ScriptError::ScriptError;
};

class ScriptExhausted : public ScriptError {
public:
  using ScriptError::ScriptError;
};

struct ScriptEntry {
  std::optional<std::string> expect_substring;
  std::string reply;
  int fail_times = 0;
  int fail_status = 503;  // status reported by the scripted failures
  std::int64_t latency_ms = 0;
};

using Script = std::vector<ScriptEntry>;

// JSON array of {expect_substring?, reply, fail_times?, fail_status?, latency_ms?}.
Script parse_script(const nlohmann::json& j);
Script load_script(const std::string& path);
nlohmann::json script_to_json(const Script& s);

// Replays a script in order. Each entry first fails `fail_times` times with
// `fail_status`, then returns its reply. The expectation is checked against
// the content of the last request message.
class MockBackend final : public ChatBackend {
public:
  explicit MockBackend(Script script, std::shared_ptr<ConcurrencyGate> gate = nullptr);

  ChatReply complete(const ChatRequest& request) override;
  std::string describe() const override { return "mock"; }

  std::size_t consumed() const;
  std::size_t calls() const;
  std::vector<ChatRequest> requests() const;

private:
  Script script_;
  std::shared_ptr<ConcurrencyGate> gate_;
  mutable std::mutex mu_;
  std::size_t cursor_ = 0;
  int failures_ = 0;
  std::size_t calls_ = 0;
  std::vector<ChatRequest> requests_;
};

}  // namespace orsum::llm
