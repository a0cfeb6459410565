#include "orsum/llm/backend.hpp"

#include <algorithm>
#include <stdexcept>

namespace orsum::llm {

BackendError::BackendError(int status, std::string body)
    : Error("backend error (status " + std::to_string(status) + "): " + body),
      status_(status),
      body_(std::move(body)) {}

bool is_transient_status(int status) noexcept {
  return status == 408 || status == 429 || (status >= 500 && status <= 599);
}

ConcurrencyGate::ConcurrencyGate(std::size_t limit) : limit_(limit) {
  if (limit == 0) throw std::invalid_argument("concurrency limit must be positive");
}

void ConcurrencyGate::acquire() {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] { return current_ < limit_; });
  ++current_;
  peak_ = std::max(peak_, current_);
}

void ConcurrencyGate::release() {
  {
    std::lock_guard lk(mu_);
    --current_;
  }
  cv_.notify_one();
}

std::size_t ConcurrencyGate::peak() const {
  std::lock_guard lk(mu_);
  return peak_;
}

std::size_t ConcurrencyGate::in_flight() const {
  std::lock_guard lk(mu_);
  return current_;
}

ConcurrencyGate::Ticket::Ticket(ConcurrencyGate& gate) : gate_(gate) { gate_.acquire(); }
ConcurrencyGate::Ticket::~Ticket() { gate_.release(); }

}  // namespace orsum::llm
