#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orsum/error.hpp"
#include "orsum/generation.hpp"
#include "orsum/llm/chat.hpp"
#include "orsum/templates.hpp"
#include "orsum/textmetrics.hpp"

namespace orsum::judge {

class UnparseableScore : public Error {
public:
  UnparseableScore(std::string raw_reply);
  const std::string& raw_reply() const noexcept { return raw_; }

private:
  std::string raw_;
};

class OutOfRange : public Error {
public:
  OutOfRange(long value, std::string raw_reply);
  long value() const noexcept { return value_; }
  const std::string& raw_reply() const noexcept { return raw_; }

private:
  long value_;
  std::string raw_;
};

class EmptyScoreSet : public Error {
public:
  using Error::Error;
};

class SchemaError : public Error {
public:
  using Error::Error;
};

class UnknownPaperId : public Error {
public:
  UnknownPaperId(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
  std::vector<std::string> ids_;
};

enum class Aspect { DiscussionInvolvement, OpinionFaithfulness, DecisionConsistency };
enum class Protocol { FormFill, Likert };

inline constexpr Aspect kAspects[] = {Aspect::DiscussionInvolvement, Aspect::OpinionFaithfulness,
                                      Aspect::DecisionConsistency};

std::string_view to_string(Aspect a) noexcept;    // discussion_involvement, ...
std::string_view display_name(Aspect a) noexcept; // "Discussion Involvement", ...
std::string_view to_string(Protocol p) noexcept;  // geval, likert
std::optional<Protocol> parse_protocol(std::string_view s) noexcept;

// Maps a 1..5 Likert rating onto {0, .25, .5, .75, 1}.
double normalize_likert(int raw);

struct ScoreParse {
  enum class Status { Ok, NoInteger, OutOfRange } status = Status::NoInteger;
  long value = 0;
};

// First standalone integer in `reply` after removing lines (or line
// prefixes) echoed from `prompt` and scale phrases such as "1-5",
// "1 to 5", "out of 5" and "/5". Decimals are not integers.
ScoreParse extract_score(std::string_view reply, std::string_view prompt = {});

struct JudgeInput {
  std::string paper_id;
  std::vector<std::string> reviews;  // already labeled, untruncated
  std::string metareview;
  std::string decision;  // outcome word
};

JudgeInput judge_input(const PaperRecord& paper, const std::string& metareview);

struct JudgeScore {
  std::string paper_id;
  Aspect aspect = Aspect::DiscussionInvolvement;
  Protocol protocol = Protocol::Likert;
  int raw = 1;
  double normalized = 0.0;
  std::string transcript_ref;
  std::vector<llm::Exchange> exchanges;
};

// Templates: geval, likert, composition, reask, plus per-aspect
// criteria_<aspect> and steps_<aspect>.
TemplateSet default_templates();

JudgeScore judge_aspect(const JudgeInput& input, Aspect aspect, Protocol protocol,
                        const SessionFactory& sessions,
                        const TemplateSet& templates = default_templates());

struct SentenceScore {
  std::string sentence;
  int pros_cons = 0;
  int consensus_controversy = 0;
};

struct CompositionScore {
  std::string paper_id;
  int pros_cons = 0;
  int consensus_controversy = 0;
  std::vector<SentenceScore> per_sentence;
  std::vector<llm::Exchange> exchanges;
};

// Document score per dimension is the maximum over its sentences.
CompositionScore composition_from_sentences(std::string paper_id, std::vector<SentenceScore> sentences);

// Exactly `count` "a/b" pairs (each 0..2), optionally prefixed by
// "<index>:". Throws UnparseableScore otherwise.
std::vector<std::pair<int, int>> parse_composition_reply(std::string_view reply, std::size_t count);

// One exchange per batch of `batch_size` sentences (0 = all at once).
CompositionScore composition_score(const std::string& paper_id, const std::string& metareview,
                                   const SessionFactory& sessions, std::size_t batch_size = 0,
                                   const TemplateSet& templates = default_templates());

// ---------------------------------------------------------------------------
// Aggregation

// Scores gathered for one generated meta-review, keyed by metric column:
// rouge_l, geval.<aspect>, likert.<aspect>, composition.pros_cons,
// composition.consensus_controversy, and imported external metric names.
struct RecordScores {
  std::string paper_id;
  std::map<std::string, double> metrics;
};

// Column names for the requested metric families (rouge-l, geval, likert,
// composition); geval/likert add their unweighted aspect mean as `geval` /
// `likert`.
std::vector<std::string> metric_columns(const std::vector<std::string>& families);

double mean(const std::vector<double>& xs);

struct Incomplete {
  std::string paper_id;
  std::vector<std::string> missing;
};

struct EvalRow {
  std::string method;
  std::size_t count = 0;
  std::map<std::string, double> means;
  std::vector<Incomplete> incomplete;
};

// Means over the records that carry every requested column; records missing
// any column are listed under `incomplete` instead. Derived aspect means
// (`geval`, `likert`) are computed per record before averaging.
EvalRow aggregate(const std::string& method, const std::vector<RecordScores>& records,
                  const std::vector<std::string>& columns);

struct ExternalScores {
  // metric -> method ("*" = any) -> paper_id -> value
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> values;
  std::vector<std::string> unnormalized;  // "<metric>:<paper_id>" with value outside [0,1]

  std::optional<double> lookup(const std::string& metric, const std::string& method,
                               const std::string& paper_id) const;
  std::vector<std::string> metrics() const;
};

// Line-delimited {paper_id, metric, value[, method]}.
ExternalScores import_external_scores(const std::string& path, const std::set<std::string>& known_ids);
ExternalScores parse_external_scores(std::string_view text, const std::set<std::string>& known_ids);

struct EvalReport {
  std::vector<std::string> columns;
  std::vector<EvalRow> rows;
  nlohmann::json config_snapshot = nlohmann::json::object();
  std::vector<std::string> unnormalized;
};

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);
std::string render_table(const EvalReport& r);

// Score file line: {paper_id, method, metric, raw, normalized}.
nlohmann::json score_line(const std::string& paper_id, const std::string& method,
                          const std::string& metric, double raw, double normalized);

}  // namespace orsum::judge
