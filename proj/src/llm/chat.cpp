#include "orsum/llm/chat.hpp"

#include <stdexcept>

namespace orsum::llm {

using nlohmann::json;

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::System:
      return "system";
    case Role::User:
      return "user";
    case Role::Assistant:
      return "assistant";
  }
  return "user";
}

std::string_view to_string(MessageTag t) noexcept {
  switch (t) {
    case MessageTag::RawReview:
      return "raw-review";
    case MessageTag::Discussion:
      return "discussion";
    case MessageTag::Draft:
      return "draft";
    case MessageTag::Feedback:
      return "feedback";
    case MessageTag::Other:
      return "other";
  }
  return "other";
}

std::optional<Role> parse_role(std::string_view s) noexcept {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  return std::nullopt;
}

std::optional<MessageTag> parse_tag(std::string_view s) noexcept {
  for (auto t : {MessageTag::RawReview, MessageTag::Discussion, MessageTag::Draft,
                 MessageTag::Feedback, MessageTag::Other})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

json to_json(const ChatMessage& m) {
  return {{"role", to_string(m.role)}, {"content", m.content}, {"tag", to_string(m.tag)}};
}

ChatMessage message_from_json(const json& j) {
  ChatMessage m;
  auto role = parse_role(j.at("role").get<std::string>());
  if (!role) throw std::invalid_argument("unknown role");
  m.role = *role;
  m.content = j.at("content").get<std::string>();
  if (auto it = j.find("tag"); it != j.end()) {
    auto tag = parse_tag(it->get<std::string>());
    if (!tag) throw std::invalid_argument("unknown message tag");
    m.tag = *tag;
  }
  return m;
}

json to_json(const Exchange& e) {
  json msgs = json::array();
  for (const auto& m : e.request_messages) msgs.push_back(to_json(m));
  return {{"seq", e.seq},
          {"request_messages", std::move(msgs)},
          {"reply", e.reply},
          {"attempts", e.attempts},
          {"elapsed_ms", e.elapsed_ms}};
}

Exchange exchange_from_json(const json& j) {
  Exchange e;
  e.seq = j.at("seq").get<std::size_t>();
  for (const auto& m : j.at("request_messages")) e.request_messages.push_back(message_from_json(m));
  e.reply = j.at("reply").get<std::string>();
  e.attempts = j.at("attempts").get<int>();
  e.elapsed_ms = j.at("elapsed_ms").get<std::int64_t>();
  return e;
}

json request_body(const ChatRequest& req) {
  json msgs = json::array();
  for (const auto& m : req.messages)
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return {{"model", req.model}, {"messages", std::move(msgs)}, {"temperature", req.temperature}};
}

std::string transcript_jsonl(const std::vector<Exchange>& exchanges) {
  std::string out;
  for (const auto& e : exchanges) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

}  // namespace orsum::llm
