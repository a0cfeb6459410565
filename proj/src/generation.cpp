#include "orsum/generation.hpp"

#include <map>

#include "orsum/baselines.hpp"
#include "orsum/cgi2.hpp"
#include "orsum/lexrank.hpp"
#include "orsum/llm/mock_backend.hpp"
#include "orsum/templates.hpp"

namespace orsum {

using nlohmann::json;

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::CGI2:
      return "cgi2";
    case Method::Vanilla:
      return "vanilla";
    case Method::ThreeSent:
      return "3sent";
    case Method::ICL:
      return "icl";
    case Method::LexRank:
      return "lexrank";
  }
  return "vanilla";
}

std::optional<Method> parse_method(std::string_view s) noexcept {
  for (auto m : {Method::CGI2, Method::Vanilla, Method::ThreeSent, Method::ICL, Method::LexRank})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

json trace_to_json(const GenerationTrace& t, const std::string& transcript_path) {
  json status = {{"ok", t.status.ok}};
  if (!t.status.ok) {
    status["error_kind"] = t.status.error_kind;
    status["message"] = t.status.message;
    status["failed_step"] = t.status.failed_step;
  }
  return {{"paper_id", t.paper_id},
          {"method", to_string(t.method)},
          {"config_snapshot", t.config_snapshot},
          {"drafts", t.drafts},
          {"transcript_path", transcript_path},
          {"exchange_count", t.exchanges.size()},
          {"artifacts", t.artifacts},
          {"status", std::move(status)},
          {"version", kToolVersion}};
}

GenerationTrace trace_from_json(const json& j, std::vector<llm::Exchange> exchanges) {
  GenerationTrace t;
  t.paper_id = j.at("paper_id").get<std::string>();
  auto m = parse_method(j.at("method").get<std::string>());
  if (!m) throw Error("unknown method in trace: " + j.at("method").dump());
  t.method = *m;
  t.config_snapshot = j.value("config_snapshot", json::object());
  t.drafts = j.at("drafts").get<std::vector<std::string>>();
  t.artifacts = j.value("artifacts", json::object());
  const auto& st = j.at("status");
  t.status.ok = st.at("ok").get<bool>();
  t.status.error_kind = st.value("error_kind", "");
  t.status.message = st.value("message", "");
  t.status.failed_step = st.value("failed_step", "");
  t.exchanges = std::move(exchanges);
  return t;
}

std::vector<std::string> reviewer_labels(const PaperRecord& paper) {
  std::vector<std::string> labels;
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < paper.reviews.size(); ++i) {
    std::string l = paper.reviews[i].reviewer_id;
    if (l.find_first_not_of(" \t") == std::string::npos) l = "Reviewer_" + std::to_string(i + 1);
    if (int k = seen[l]++; k > 0) l += "#" + std::to_string(k + 1);
    labels.push_back(std::move(l));
  }
  return labels;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const cgi2::ParseFailure*>(&e)) return "ParseFailure";
  if (dynamic_cast<const cgi2::InvalidChecklist*>(&e)) return "InvalidChecklist";
  if (dynamic_cast<const llm::EmptyReply*>(&e)) return "EmptyReply";
  if (dynamic_cast<const llm::BudgetExceeded*>(&e)) return "BudgetExceeded";
  if (dynamic_cast<const llm::Timeout*>(&e)) return "Timeout";
  if (dynamic_cast<const llm::BackendError*>(&e)) return "BackendError";
  if (dynamic_cast<const llm::ScriptMismatch*>(&e)) return "ScriptMismatch";
  if (dynamic_cast<const llm::ScriptExhausted*>(&e)) return "ScriptExhausted";
  if (dynamic_cast<const llm::ScriptError*>(&e)) return "ScriptError";
  if (dynamic_cast<const baselines::NoSentences*>(&e)) return "NoSentences";
  if (dynamic_cast<const baselines::MissingExemplar*>(&e)) return "MissingExemplar";
  if (dynamic_cast<const lexrank::NoConvergence*>(&e)) return "NoConvergence";
  if (dynamic_cast<const TemplateError*>(&e)) return "TemplateError";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "InvalidArgument";
  return "Error";
}

}  // namespace orsum
