#include "orsum/llm/session.hpp"

#include <stdexcept>
#include <thread>

#include <algorithm>
#include <cctype>

namespace orsum::llm {

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  return base_delay * (1LL << std::max(0, attempt - 2));
}

std::string truncate_review(std::string_view text, std::size_t cap) {
  if (cap == 0) throw std::invalid_argument("truncation cap must be >= 1");
  const auto tokens = [&] {
    // Case is preserved here; only the statistics tokenizer lowercases.
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (i < text.size() && out.size() < cap) {
      while (i < text.size() && space(text[i])) ++i;
      const std::size_t b = i;
      while (i < text.size() && !space(text[i])) ++i;
      if (i > b) out.push_back(text.substr(b, i - b));
    }
    return out;
  }();
  std::string out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (k) out += ' ';
    out += tokens[k];
  }
  return out;
}

ChatSession::ChatSession(std::shared_ptr<ChatBackend> backend, SessionBudget budget,
                         RetryPolicy retry, RequestOptions options)
    : backend_(std::move(backend)),
      budget_(budget),
      retry_(std::move(retry)),
      options_(std::move(options)) {
  if (!backend_) throw std::invalid_argument("session needs a backend");
  if (budget_.per_review_token_cap == 0 || budget_.max_exchanges == 0 ||
      budget_.request_timeout.count() <= 0)
    throw std::invalid_argument("session budget values must be positive");
  if (retry_.max_attempts < 1) throw std::invalid_argument("retry attempts must be >= 1");
  if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void ChatSession::add_context(ChatMessage message) {
  if (message.role == Role::Assistant && !history_.empty() &&
      history_.back().role == Role::Assistant)
    throw std::invalid_argument("two consecutive assistant messages");
  history_.push_back(std::move(message));
}

ChatMessage ChatSession::send(ChatMessage message, MessageTag reply_tag) {
  if (message.content.empty()) throw std::invalid_argument("cannot send an empty message");
  if (message.role == Role::Assistant) throw std::invalid_argument("cannot send an assistant message");
  if (transcript_.size() >= budget_.max_exchanges)
    throw BudgetExceeded("session already completed " + std::to_string(transcript_.size()) +
                         " of " + std::to_string(budget_.max_exchanges) + " exchanges");

  ChatRequest request;
  request.model = options_.model;
  request.temperature = options_.temperature;
  request.timeout = budget_.request_timeout;
  request.messages = history_;
  request.messages.push_back(message);

  int attempt = 1;
  ChatReply reply;
  for (;; ++attempt) {
    try {
      reply = backend_->complete(request);
      break;
    } catch (const TransientBackendError&) {
      if (attempt >= retry_.max_attempts) throw;
      retry_.sleep(retry_.delay_before(attempt + 1));
    }
  }

  Exchange ex;
  ex.seq = transcript_.size() + 1;
  ex.request_messages = request.messages;
  ex.reply = reply.content;
  ex.attempts = attempt;
  ex.elapsed_ms = reply.elapsed_ms;
  transcript_.push_back(std::move(ex));

  if (reply.content.find_first_not_of(" \t\r\n") == std::string::npos)
    throw EmptyReply("backend returned an empty reply at exchange " +
                     std::to_string(transcript_.size()));

  history_.push_back(std::move(message));
  history_.push_back(ChatMessage::assistant(reply.content, reply_tag));
  return history_.back();
}

void ChatSession::prune(const std::function<bool(const ChatMessage&)>& remove) {
  std::erase_if(history_, remove);
}

bool is_raw_review(const ChatMessage& m) noexcept { return m.tag == MessageTag::RawReview; }

void prune_history(ChatSession& session, const std::function<bool(const ChatMessage&)>& remove) {
  session.prune(remove);
}

}  // namespace orsum::llm
