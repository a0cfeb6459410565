#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "orsum/llm/backend.hpp"
#include "orsum/llm/chat.hpp"

namespace orsum::llm {

class BudgetExceeded : public Error {
public:
  using Error::Error;
};

class EmptyReply : public Error {
public:
  using Error::Error;
};

struct SessionBudget {
  std::size_t per_review_token_cap = 300;
  std::size_t max_exchanges = 1000;
  std::chrono::milliseconds request_timeout{60000};
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{1000};  // doubles after every failed attempt
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for

  std::chrono::milliseconds delay_before(int attempt) const;  // attempt >= 2
};

struct RequestOptions {
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
};

// First `cap` whitespace tokens joined by single spaces.
std::string truncate_review(std::string_view text, std::size_t cap);

// Single-owner conversation with a backend. History is what the model sees;
// the transcript is the append-only audit log of every exchange.
class ChatSession {
public:
  ChatSession(std::shared_ptr<ChatBackend> backend, SessionBudget budget = {},
              RetryPolicy retry = {}, RequestOptions options = {});

  // Appends a message without contacting the backend.
  void add_context(ChatMessage message);

  // Sends `message` with the current history. On success both the message
  // and the reply (tagged `reply_tag`) join the history. Transient failures
  // are retried per the retry policy. An empty reply is logged in the
  // transcript and raises EmptyReply without extending the history.
  ChatMessage send(ChatMessage message, MessageTag reply_tag = MessageTag::Other);

  // Removes matching messages from the history; the transcript is untouched.
  void prune(const std::function<bool(const ChatMessage&)>& remove);

  const std::vector<ChatMessage>& history() const noexcept { return history_; }
  const std::vector<Exchange>& transcript() const noexcept { return transcript_; }
  std::size_t exchanges() const noexcept { return transcript_.size(); }
  const SessionBudget& budget() const noexcept { return budget_; }

private:
  std::shared_ptr<ChatBackend> backend_;
  SessionBudget budget_;
  RetryPolicy retry_;
  RequestOptions options_;
  std::vector<ChatMessage> history_;
  std::vector<Exchange> transcript_;
};

bool is_raw_review(const ChatMessage& m) noexcept;

// Drops raw-review messages from the session history.
void prune_history(ChatSession& session,
                   const std::function<bool(const ChatMessage&)>& remove = is_raw_review);

}  // namespace orsum::llm
