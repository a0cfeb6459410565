#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace orsum::llm {

enum class Role { System, User, Assistant };

// Provenance of a history message. Only `RawReview` content is removed when
// the history is pruned.
enum class MessageTag { RawReview, Discussion, Draft, Feedback, Other };

std::string_view to_string(Role r) noexcept;
std::string_view to_string(MessageTag t) noexcept;
std::optional<Role> parse_role(std::string_view s) noexcept;
std::optional<MessageTag> parse_tag(std::string_view s) noexcept;

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  MessageTag tag = MessageTag::Other;

  static ChatMessage system(std::string content, MessageTag tag = MessageTag::Other) {
    return {Role::System, std::move(content), tag};
  }
  static ChatMessage user(std::string content, MessageTag tag = MessageTag::Other) {
    return {Role::User, std::move(content), tag};
  }
  static ChatMessage assistant(std::string content, MessageTag tag = MessageTag::Other) {
    return {Role::Assistant, std::move(content), tag};
  }

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60000};
};

struct ChatReply {
  std::string content;
  // Backend-measured time for this attempt. The mock reports its scripted
  // latency so transcripts stay reproducible.
  std::int64_t elapsed_ms = 0;
};

// One completed exchange in a session's audit log.
struct Exchange {
  std::size_t seq = 0;
  std::vector<ChatMessage> request_messages;
  std::string reply;
  int attempts = 0;
  std::int64_t elapsed_ms = 0;
};

nlohmann::json to_json(const ChatMessage& m);
ChatMessage message_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Exchange& e);
Exchange exchange_from_json(const nlohmann::json& j);

// Wire body of the chat-completion protocol: {model, messages, temperature}.
nlohmann::json request_body(const ChatRequest& req);

// Line-delimited transcript: one exchange object per line.
std::string transcript_jsonl(const std::vector<Exchange>& exchanges);

}  // namespace orsum::llm
