#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orsum/corpus.hpp"
#include "orsum/error.hpp"
#include "orsum/generation.hpp"
#include "orsum/llm/session.hpp"
#include "orsum/templates.hpp"

namespace orsum::cgi2 {

// A structured reply that could not be parsed, even after one re-ask.
class ParseFailure : public Error {
public:
  ParseFailure(std::string cause, std::string raw_reply);
  const std::string& cause() const noexcept { return cause_; }
  const std::string& raw_reply() const noexcept { return raw_; }

private:
  std::string cause_;
  std::string raw_;
};

class InvalidChecklist : public Error {
public:
  using Error::Error;
};

enum class Sentiment { Positive, Negative, Mixed };
std::string_view to_string(Sentiment s) noexcept;

struct OpinionItem {
  std::string reviewer_id;
  std::string aspect;
  Sentiment sentiment = Sentiment::Mixed;
  std::string statement;
  std::string evidence;

  friend bool operator==(const OpinionItem&, const OpinionItem&) = default;
};

struct DiscussionPoint {
  std::string statement;
  std::vector<std::string> reviewers;  // for controversies: in_favor then against
  std::string evidence;
  std::vector<std::string> against;  // controversies only

  friend bool operator==(const DiscussionPoint&, const DiscussionPoint&) = default;
};

struct ProsCons {
  std::vector<DiscussionPoint> strengths;
  std::vector<DiscussionPoint> weaknesses;
};

struct ConsensusControversy {
  std::vector<DiscussionPoint> consensuses;
  std::vector<DiscussionPoint> controversies;
};

struct DiscussionBundle {
  ProsCons pros_cons;
  ConsensusControversy agreement;
};

struct ChecklistItem {
  std::size_t position = 0;  // 1-based
  std::string question;

  // Question with the decision slot ("acceptance/rejection" or "{decision}")
  // filled with the paper's outcome word.
  std::string for_decision(const std::string& outcome_word) const;

  friend bool operator==(const ChecklistItem&, const ChecklistItem&) = default;
};

using Checklist = std::vector<ChecklistItem>;

// The four meta-review questions, verbatim.
const Checklist& default_checklist();
// One question per line; trailing blank lines are ignored, interior blank
// lines are rejected so positions match line numbers.
Checklist parse_checklist(std::string_view text);
Checklist load_checklist(const std::string& path);

// Default prompt templates; names: system, paper, review, extract_opinions,
// pros_cons, consensus_controversy, draft, feedback, revise, reask.
TemplateSet default_templates();

// Reply parsers. `labels` are the paper's reviewer labels; references to
// anyone else are rejected.
std::vector<OpinionItem> parse_opinions(std::string_view reply, const std::string& reviewer,
                                        const std::vector<std::string>& labels);
ProsCons parse_pros_cons(std::string_view reply, const std::vector<std::string>& labels);
ConsensusControversy parse_consensus_controversy(std::string_view reply,
                                                 const std::vector<std::string>& labels);

std::string render_opinions(const std::vector<OpinionItem>& items);
std::string render_bundle(const DiscussionBundle& bundle);

nlohmann::json to_json(const OpinionItem& o);
nlohmann::json to_json(const DiscussionBundle& b);

// Context shared by the individual steps of one run.
struct StepContext {
  const PaperRecord* paper = nullptr;
  std::vector<std::string> labels;
  const TemplateSet* templates = nullptr;
};

// Sends the truncated review as raw-review context, then asks for opinions.
std::vector<OpinionItem> extract_opinions(llm::ChatSession& session, const StepContext& ctx,
                                          std::size_t review_index);
ProsCons synthesize_pros_cons(llm::ChatSession& session, const StepContext& ctx,
                              const std::vector<OpinionItem>& opinions);
ConsensusControversy analyze_consensus_controversy(llm::ChatSession& session,
                                                   const StepContext& ctx,
                                                   const std::vector<OpinionItem>& opinions);
std::string draft_metareview(llm::ChatSession& session, const StepContext& ctx,
                             const DiscussionBundle& bundle);

struct Introspection {
  std::string feedback;
  std::string revised_draft;
};

// Feedback exchange on `item`, then a revision exchange applying it.
Introspection introspect_step(llm::ChatSession& session, const StepContext& ctx,
                              const std::string& draft, const ChecklistItem& item);

struct Cgi2Options {
  int iterations = 2;
  Checklist checklist = default_checklist();
  TemplateSet templates = default_templates();
};

// Initial four-step run followed by `iterations` passes over the checklist.
// Exchanges on success: R + 3 + iterations * 2K. Failures are recorded in
// the returned trace's status together with everything produced so far.
GenerationTrace run_cgi2(const PaperRecord& paper, const Cgi2Options& options,
                         const SessionFactory& sessions);

}  // namespace orsum::cgi2
