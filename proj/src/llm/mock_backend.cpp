#include "orsum/llm/mock_backend.hpp"

#include <fstream>
#include <thread>

namespace orsum::llm {

using nlohmann::json;

Script parse_script(const json& j) {
  if (!j.is_array()) throw ScriptError("mock script must be a JSON array");
  Script s;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_object() || !e.contains("reply") || !e["reply"].is_string())
      throw ScriptError("script entry " + std::to_string(i) + " needs a string `reply`");
    ScriptEntry entry;
    entry.reply = e["reply"].get<std::string>();
    if (auto it = e.find("expect_substring"); it != e.end() && !it->is_null())
      entry.expect_substring = it->get<std::string>();
    entry.fail_times = e.value("fail_times", 0);
    entry.fail_status = e.value("fail_status", 503);
    entry.latency_ms = e.value("latency_ms", std::int64_t{0});
    if (entry.fail_times < 0) throw ScriptError("fail_times must be >= 0");
    s.push_back(std::move(entry));
  }
  return s;
}

Script load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScriptError("cannot open mock script: " + path);
  try {
    return parse_script(json::parse(in));
  } catch (const json::exception& e) {
    throw ScriptError("invalid mock script " + path + ": " + e.what());
  }
}

json script_to_json(const Script& s) {
  json out = json::array();
  for (const auto& e : s) {
    json j = {{"reply", e.reply}};
    if (e.expect_substring) j["expect_substring"] = *e.expect_substring;
    if (e.fail_times) {
      j["fail_times"] = e.fail_times;
      j["fail_status"] = e.fail_status;
    }
    if (e.latency_ms) j["latency_ms"] = e.latency_ms;
    out.push_back(std::move(j));
  }
  return out;
}

MockBackend::MockBackend(Script script, std::shared_ptr<ConcurrencyGate> gate)
    : script_(std::move(script)), gate_(std::move(gate)) {}

ChatReply MockBackend::complete(const ChatRequest& request) {
  std::optional<ConcurrencyGate::Ticket> ticket;
  if (gate_) ticket.emplace(*gate_);

  ScriptEntry entry;
  bool fail = false;
  {
    std::lock_guard lk(mu_);
    ++calls_;
    requests_.push_back(request);
    if (cursor_ >= script_.size())
      throw ScriptExhausted("mock script exhausted after " + std::to_string(script_.size()) +
                            " replies");
    entry = script_[cursor_];
    if (entry.expect_substring) {
      const std::string& last = request.messages.empty() ? std::string() : request.messages.back().content;
      if (last.find(*entry.expect_substring) == std::string::npos)
        throw ScriptMismatch("script entry " + std::to_string(cursor_) + " expected substring \"" +
                             *entry.expect_substring + "\" in outgoing message");
    }
    if (failures_ < entry.fail_times) {
      ++failures_;
      fail = true;
    } else {
      ++cursor_;
      failures_ = 0;
    }
  }
  if (entry.latency_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(entry.latency_ms));
  if (fail) {
    const std::string body = "scripted failure";
    if (is_transient_status(entry.fail_status)) throw TransientBackendError(entry.fail_status, body);
    throw BackendError(entry.fail_status, body);
  }
  return {entry.reply, entry.latency_ms};
}

std::size_t MockBackend::consumed() const {
  std::lock_guard lk(mu_);
  return cursor_;
}

std::size_t MockBackend::calls() const {
  std::lock_guard lk(mu_);
  return calls_;
}

std::vector<ChatRequest> MockBackend::requests() const {
  std::lock_guard lk(mu_);
  return requests_;
}

}  // namespace orsum::llm
