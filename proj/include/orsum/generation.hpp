#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orsum/corpus.hpp"
#include "orsum/llm/backend.hpp"
#include "orsum/llm/chat.hpp"
#include "orsum/llm/session.hpp"

namespace orsum {

inline constexpr std::string_view kToolVersion = "orsum 0.1.0";

enum class Method { CGI2, Vanilla, ThreeSent, ICL, LexRank };

std::string_view to_string(Method m) noexcept;  // cgi2, vanilla, 3sent, icl, lexrank
std::optional<Method> parse_method(std::string_view s) noexcept;

struct TraceStatus {
  bool ok = true;
  std::string error_kind;  // e.g. ParseFailure, BackendError
  std::string message;
  std::string failed_step;

  friend bool operator==(const TraceStatus&, const TraceStatus&) = default;
};

// Audit log of one generation run for one paper.
struct GenerationTrace {
  std::string paper_id;
  Method method = Method::Vanilla;
  std::vector<std::string> drafts;  // drafts[0] initial, last = final
  std::vector<llm::Exchange> exchanges;
  nlohmann::json config_snapshot = nlohmann::json::object();
  nlohmann::json artifacts = nlohmann::json::object();  // intermediate structured results
  TraceStatus status;

  const std::string* final_draft() const noexcept {
    return drafts.empty() ? nullptr : &drafts.back();
  }
};

// Trace file body. `transcript_path` points at the line-delimited exchange log.
nlohmann::json trace_to_json(const GenerationTrace& t, const std::string& transcript_path);
GenerationTrace trace_from_json(const nlohmann::json& j, std::vector<llm::Exchange> exchanges = {});

// Everything a generator needs to open chat sessions.
struct SessionFactory {
  std::shared_ptr<llm::ChatBackend> backend;
  llm::SessionBudget budget;
  llm::RetryPolicy retry;
  llm::RequestOptions request;

  llm::ChatSession open() const { return llm::ChatSession(backend, budget, retry, request); }
};

// Stable display label for the i-th review: its reviewer id, or
// "Reviewer_<i+1>" when the id is blank. Duplicates get a "#k" suffix.
std::vector<std::string> reviewer_labels(const PaperRecord& paper);

// Maps a caught exception to the kind recorded in a failed trace.
std::string error_kind(const std::exception& e);

}  // namespace orsum
