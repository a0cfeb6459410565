#pragma once

#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <string>

#include "orsum/error.hpp"
#include "orsum/llm/chat.hpp"

namespace orsum::llm {

// Non-success response from a backend. status 0 means no HTTP status was
// received (connection failure).
class BackendError : public Error {
public:
  BackendError(int status, std::string body);
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

private:
  int status_;
  std::string body_;
};

// Failures worth retrying: timeouts, 429, 5xx, dropped connections.
class TransientBackendError : public BackendError {
public:
  using BackendError::BackendError;
};

class Timeout : public TransientBackendError {
public:
  explicit Timeout(const std::string& what) : TransientBackendError(0, what) {}
};

bool is_transient_status(int status) noexcept;

// Counting gate that caps concurrent in-flight requests and records the
// highest concurrency it has observed.
class ConcurrencyGate {
public:
  explicit ConcurrencyGate(std::size_t limit);

  class Ticket {
  public:
    explicit Ticket(ConcurrencyGate& gate);
    ~Ticket();
    Ticket(const Ticket&) = delete;
    Ticket& operator=(const Ticket&) = delete;

  private:
    ConcurrencyGate& gate_;
  };

  std::size_t limit() const noexcept { return limit_; }
  std::size_t peak() const;
  std::size_t in_flight() const;

private:
  void acquire();
  void release();

  std::size_t limit_;
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
  mutable std::mutex mu_;
  std::condition_variable cv_;
};

// Chat-completion backend. Implementations must be safe to call from many
// threads.
class ChatBackend {
public:
  virtual ~ChatBackend() = default;
  virtual ChatReply complete(const ChatRequest& request) = 0;
  virtual std::string describe() const = 0;
};

}  // namespace orsum::llm
