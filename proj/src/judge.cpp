#include "orsum/judge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

#include "orsum/sentences.hpp"

namespace orsum::judge {

using llm::ChatMessage;
using llm::MessageTag;
using nlohmann::json;

UnparseableScore::UnparseableScore(std::string raw_reply)
    : Error("no score found in judge reply: " + raw_reply.substr(0, 200)), raw_(std::move(raw_reply)) {}

OutOfRange::OutOfRange(long value, std::string raw_reply)
    : Error("judge score " + std::to_string(value) + " is outside the allowed range"),
      value_(value),
      raw_(std::move(raw_reply)) {}

namespace {

std::string join(const std::vector<std::string>& xs, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

}  // namespace

UnknownPaperId::UnknownPaperId(std::vector<std::string> ids)
    : Error("unknown paper ids in external scores: " + join(ids, ", ")), ids_(std::move(ids)) {}

std::string_view to_string(Aspect a) noexcept {
  switch (a) {
    case Aspect::DiscussionInvolvement:
      return "discussion_involvement";
    case Aspect::OpinionFaithfulness:
      return "opinion_faithfulness";
    case Aspect::DecisionConsistency:
      return "decision_consistency";
  }
  return "discussion_involvement";
}

std::string_view display_name(Aspect a) noexcept {
  switch (a) {
    case Aspect::DiscussionInvolvement:
      return "Discussion Involvement";
    case Aspect::OpinionFaithfulness:
      return "Opinion Faithfulness";
    case Aspect::DecisionConsistency:
      return "Decision Consistency";
  }
  return "Discussion Involvement";
}

std::string_view to_string(Protocol p) noexcept { return p == Protocol::FormFill ? "geval" : "likert"; }

std::optional<Protocol> parse_protocol(std::string_view s) noexcept {
  if (s == "geval" || s == "formfill" || s == "g-eval") return Protocol::FormFill;
  if (s == "likert" || s == "gptlikert") return Protocol::Likert;
  return std::nullopt;
}

double normalize_likert(int raw) {
  if (raw < 1 || raw > 5) throw OutOfRange(raw, {});
  return static_cast<double>(raw - 1) / 4.0;
}

// ---------------------------------------------------------------------------
// Score extraction

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string l;
  while (std::getline(in, l)) out.push_back(trim(l));
  return out;
}

std::string strip_echo(std::string_view reply, std::string_view prompt) {
  std::vector<std::string> prompt_lines;
  for (auto& l : lines_of(prompt))
    if (l.size() >= 3) prompt_lines.push_back(std::move(l));
  std::string out;
  for (auto line : lines_of(reply)) {
    std::size_t best = 0;
    for (const auto& p : prompt_lines)
      if (p.size() > best && line.compare(0, p.size(), p) == 0) best = p.size();
    out += line.substr(best);
    out += '\n';
  }
  return out;
}

}  // namespace

ScoreParse extract_score(std::string_view reply, std::string_view prompt) {
  std::string text = prompt.empty() ? std::string(reply) : strip_echo(reply, prompt);
  static const std::regex scale(R"(\b1\s*(?:-|–|to)\s*5\b|(?:\bout\s+of|/)\s*5\b)", std::regex::icase);
  text = std::regex_replace(text, scale, " ");
  static const std::regex integer(R"((^|[^\w.])(\d+)(?![\w]|\.\d))");
  std::smatch m;
  if (!std::regex_search(text, m, integer)) return {};
  const std::string digits = m[2].str();
  ScoreParse out;
  out.value = digits.size() > 6 ? 1000000 : std::stol(digits);
  out.status = (out.value >= 1 && out.value <= 5) ? ScoreParse::Status::Ok : ScoreParse::Status::OutOfRange;
  return out;
}

// ---------------------------------------------------------------------------
// Templates

TemplateSet default_templates() {
  return TemplateSet({
      {"geval",
       "You will be given the reviews of a scientific paper, the final decision, and a "
       "meta-review written for them. Your task is to rate the meta-review on one metric.\n"
       "Please read these instructions carefully and refer back to them while evaluating.\n\n"
       "Evaluation Criteria:\n{aspect} (1-5): {criteria}\n\n"
       "Evaluation Steps:\n{steps}\n\n"
       "Reviews:\n{reviews}\n\n"
       "Decision: {decision}\n\n"
       "Meta-review:\n{metareview}\n\n"
       "Evaluation Form (scores ONLY):\n- {aspect}:"},
      {"likert",
       "Score the following meta-review for {aspect} on a Likert scale from 1 (worst) to 5 "
       "(best). {criteria}\n\n"
       "Reviews:\n{reviews}\n\n"
       "Decision: {decision}\n\n"
       "Meta-review:\n{metareview}\n\n"
       "Reply with the score only."},
      {"criteria_discussion_involvement",
       "Does the meta-review discuss the paper's strengths and weaknesses, and the agreements and "
       "disagreements among the reviewers, with concrete evidence?"},
      {"criteria_opinion_faithfulness",
       "Does the meta-review stay faithful to the reviewers' comments, without contradicting them "
       "or attributing opinions the reviewers did not express?"},
      {"criteria_decision_consistency",
       "Does the argument of the meta-review accurately reflect and support the final decision?"},
      {"steps_discussion_involvement",
       "1. Read the reviews and note the main strengths, weaknesses, agreements and disagreements.\n"
       "2. Read the meta-review and check which of them it discusses.\n"
       "3. Check whether each discussed point is backed by concrete evidence from the reviews.\n"
       "4. Assign a score from 1 to 5."},
      {"steps_opinion_faithfulness",
       "1. Read the reviews and note each reviewer's opinions.\n"
       "2. Read the meta-review and identify every opinion it attributes to the reviewers.\n"
       "3. Check each attributed opinion against the reviews for contradictions or fabrications.\n"
       "4. Assign a score from 1 to 5."},
      {"steps_decision_consistency",
       "1. Note the final decision.\n"
       "2. Read the meta-review and identify the argument it makes.\n"
       "3. Check whether that argument leads to the decision.\n"
       "4. Assign a score from 1 to 5."},
      {"composition",
       "Rate each numbered sentence of the meta-review below on two dimensions, each from 0 to 2.\n"
       "A. Strengths and weaknesses of the paper: 0 = not discussed, 1 = discussed without "
       "concrete evidence, 2 = detailed discussion.\n"
       "B. Agreements and disagreements among the reviewers: 0 = not discussed, 1 = discussed "
       "without concrete evidence, 2 = detailed discussion.\n"
       "Reply with one line per sentence in the form \"<number>: <A>/<B>\".\n\n"
       "Sentences:\n{sentences}"},
      {"reask", "Reply with a single integer 1-5"},
      {"reask_composition",
       "Reply again with exactly {count} lines of the form \"<number>: <A>/<B>\" with A and B in "
       "0, 1 or 2."},
  });
}

JudgeInput judge_input(const PaperRecord& paper, const std::string& metareview) {
  JudgeInput in;
  in.paper_id = paper.id;
  in.metareview = metareview;
  in.decision = paper.decision.outcome_word();
  const auto labels = reviewer_labels(paper);
  for (std::size_t i = 0; i < paper.reviews.size(); ++i)
    in.reviews.push_back(labels[i] + ": " + paper.reviews[i].text);
  return in;
}

JudgeScore judge_aspect(const JudgeInput& input, Aspect aspect, Protocol protocol,
                        const SessionFactory& sessions, const TemplateSet& templates) {
  if (trim(input.metareview).empty()) throw std::invalid_argument("cannot judge an empty meta-review");
  const std::string key(to_string(aspect));
  std::string reviews;
  for (std::size_t i = 0; i < input.reviews.size(); ++i) {
    if (i) reviews += "\n\n";
    reviews += llm::truncate_review(input.reviews[i], sessions.budget.per_review_token_cap);
  }
  const Slots slots = {{"aspect", std::string(display_name(aspect))},
                       {"criteria", templates.get("criteria_" + key)},
                       {"steps", templates.get("steps_" + key)},
                       {"reviews", reviews},
                       {"decision", input.decision},
                       {"metareview", input.metareview}};
  const std::string prompt =
      render(templates.get(protocol == Protocol::FormFill ? "geval" : "likert"), slots);

  auto session = sessions.open();
  JudgeScore score;
  score.paper_id = input.paper_id;
  score.aspect = aspect;
  score.protocol = protocol;
  auto finish = [&](long value) {
    score.raw = static_cast<int>(value);
    score.normalized = normalize_likert(score.raw);
    score.exchanges = session.transcript();
    return score;
  };

  auto first = session.send(ChatMessage::user(prompt));
  auto parsed = extract_score(first.content, prompt);
  if (parsed.status == ScoreParse::Status::Ok) return finish(parsed.value);

  const std::string reask = render(templates.get("reask"), {});
  auto second = session.send(ChatMessage::user(reask));
  auto retry = extract_score(second.content, reask);
  if (retry.status == ScoreParse::Status::Ok) return finish(retry.value);
  if (retry.status == ScoreParse::Status::OutOfRange) throw OutOfRange(retry.value, second.content);
  throw UnparseableScore(second.content);
}

// ---------------------------------------------------------------------------
// Composition

CompositionScore composition_from_sentences(std::string paper_id, std::vector<SentenceScore> sentences) {
  CompositionScore c;
  c.paper_id = std::move(paper_id);
  for (const auto& s : sentences) {
    if (s.pros_cons < 0 || s.pros_cons > 2 || s.consensus_controversy < 0 || s.consensus_controversy > 2)
      throw OutOfRange(std::max(s.pros_cons, s.consensus_controversy), s.sentence);
    c.pros_cons = std::max(c.pros_cons, s.pros_cons);
    c.consensus_controversy = std::max(c.consensus_controversy, s.consensus_controversy);
  }
  c.per_sentence = std::move(sentences);
  return c;
}

std::vector<std::pair<int, int>> parse_composition_reply(std::string_view reply, std::size_t count) {
  static const std::regex pair(R"((?:(\d+)\s*[:.)\]-]\s*)?\b([0-2])\s*/\s*([0-2])\b)");
  const std::string text(reply);
  std::vector<std::pair<int, int>> ordered;
  std::vector<std::optional<std::pair<int, int>>> indexed(count);
  bool any_index = false, all_index = true;
  for (std::sregex_iterator it(text.begin(), text.end(), pair), end; it != end; ++it) {
    const auto& m = *it;
    std::pair<int, int> v{std::stoi(m[2]), std::stoi(m[3])};
    ordered.push_back(v);
    if (m[1].matched) {
      any_index = true;
      const auto idx = std::stoul(m[1]);
      if (idx < 1 || idx > count || indexed[idx - 1]) throw UnparseableScore(text);
      indexed[idx - 1] = v;
    } else {
      all_index = false;
    }
  }
  if (ordered.size() != count) throw UnparseableScore(text);
  if (any_index && all_index) {
    std::vector<std::pair<int, int>> out;
    for (auto& v : indexed) out.push_back(*v);
    return out;
  }
  return ordered;
}

CompositionScore composition_score(const std::string& paper_id, const std::string& metareview,
                                   const SessionFactory& sessions, std::size_t batch_size,
                                   const TemplateSet& templates) {
  const auto sentences = split_sentences(metareview);
  if (sentences.empty()) throw std::invalid_argument("cannot score an empty meta-review");
  const std::size_t step = batch_size == 0 ? sentences.size() : batch_size;

  auto session = sessions.open();
  std::vector<SentenceScore> scored;
  for (std::size_t start = 0; start < sentences.size(); start += step) {
    const std::size_t n = std::min(step, sentences.size() - start);
    std::string listing;
    for (std::size_t k = 0; k < n; ++k)
      listing += std::to_string(k + 1) + ". " + sentences[start + k] + "\n";
    const auto prompt = render(templates.get("composition"), {{"sentences", listing}});
    auto reply = session.send(ChatMessage::user(prompt));
    std::vector<std::pair<int, int>> pairs;
    try {
      pairs = parse_composition_reply(reply.content, n);
    } catch (const UnparseableScore&) {
      auto again = session.send(ChatMessage::user(
          render(templates.get("reask_composition"), {{"count", std::to_string(n)}})));
      pairs = parse_composition_reply(again.content, n);
    }
    for (std::size_t k = 0; k < n; ++k)
      scored.push_back({sentences[start + k], pairs[k].first, pairs[k].second});
  }
  auto c = composition_from_sentences(paper_id, std::move(scored));
  c.exchanges = session.transcript();
  return c;
}

// ---------------------------------------------------------------------------
// Aggregation

std::vector<std::string> metric_columns(const std::vector<std::string>& families) {
  std::vector<std::string> cols;
  for (const auto& f : families) {
    if (f == "rouge-l" || f == "rouge_l") {
      cols.push_back("rouge_l");
    } else if (auto p = parse_protocol(f)) {
      const std::string prefix(to_string(*p));
      for (auto a : kAspects) cols.push_back(prefix + "." + std::string(to_string(a)));
      cols.push_back(prefix);
    } else if (f == "composition") {
      cols.push_back("composition.pros_cons");
      cols.push_back("composition.consensus_controversy");
    } else {
      throw std::invalid_argument("unknown metric family: " + f);
    }
  }
  return cols;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw EmptyScoreSet("mean of an empty score set");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

namespace {

// Fills derived `geval` / `likert` columns from their per-aspect scores.
std::map<std::string, double> with_derived(const std::map<std::string, double>& m) {
  auto out = m;
  for (auto p : {Protocol::FormFill, Protocol::Likert}) {
    const std::string prefix(to_string(p));
    std::vector<double> vals;
    for (auto a : kAspects)
      if (auto it = m.find(prefix + "." + std::string(to_string(a))); it != m.end()) vals.push_back(it->second);
    if (vals.size() == std::size(kAspects) && !out.contains(prefix)) out[prefix] = mean(vals);
  }
  return out;
}

}  // namespace

EvalRow aggregate(const std::string& method, const std::vector<RecordScores>& records,
                  const std::vector<std::string>& columns) {
  if (records.empty()) throw EmptyScoreSet("no records to aggregate for method " + method);
  EvalRow row;
  row.method = method;
  std::map<std::string, std::vector<double>> values;
  for (const auto& rec : records) {
    const auto m = with_derived(rec.metrics);
    Incomplete inc{rec.paper_id, {}};
    for (const auto& c : columns)
      if (!m.contains(c)) inc.missing.push_back(c);
    if (!inc.missing.empty()) {
      row.incomplete.push_back(std::move(inc));
      continue;
    }
    ++row.count;
    for (const auto& c : columns) values[c].push_back(m.at(c));
  }
  if (row.count == 0)
    throw EmptyScoreSet("no record of method " + method + " has every requested metric");
  for (const auto& c : columns) row.means[c] = mean(values[c]);
  return row;
}

// ---------------------------------------------------------------------------
// External scores

std::optional<double> ExternalScores::lookup(const std::string& metric, const std::string& method,
                                             const std::string& paper_id) const {
  auto m = values.find(metric);
  if (m == values.end()) return std::nullopt;
  for (const auto& key : {method, std::string("*")}) {
    auto by_method = m->second.find(key);
    if (by_method == m->second.end()) continue;
    auto v = by_method->second.find(paper_id);
    if (v != by_method->second.end()) return v->second;
  }
  return std::nullopt;
}

std::vector<std::string> ExternalScores::metrics() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values) out.push_back(k);
  return out;
}

ExternalScores parse_external_scores(std::string_view text, const std::set<std::string>& known_ids) {
  ExternalScores out;
  std::vector<std::string> unknown;
  std::size_t lineno = 0;
  for (const auto& line : lines_of(text)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("paper_id") || !j["paper_id"].is_string() || !j.contains("metric") ||
        !j["metric"].is_string() || !j.contains("value") || !j["value"].is_number())
      throw SchemaError("line " + std::to_string(lineno) +
                        ": expected {paper_id: string, metric: string, value: number}");
    const auto id = j["paper_id"].get<std::string>();
    const auto metric = j["metric"].get<std::string>();
    const double value = j["value"].get<double>();
    const std::string method = j.contains("method") && j["method"].is_string() ? j["method"].get<std::string>() : "*";
    if (!known_ids.contains(id)) {
      if (std::find(unknown.begin(), unknown.end(), id) == unknown.end()) unknown.push_back(id);
      continue;
    }
    if (value < 0.0 || value > 1.0) out.unnormalized.push_back(metric + ":" + id);
    out.values[metric][method][id] = value;
  }
  if (!unknown.empty()) throw UnknownPaperId(std::move(unknown));
  return out;
}

ExternalScores import_external_scores(const std::string& path, const std::set<std::string>& known_ids) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open external score file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_external_scores(ss.str(), known_ids);
}

// ---------------------------------------------------------------------------
// Report

json to_json(const EvalReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json inc = json::array();
    for (const auto& i : row.incomplete) inc.push_back({{"paper_id", i.paper_id}, {"missing", i.missing}});
    rows.push_back({{"method", row.method}, {"count", row.count}, {"means", row.means}, {"incomplete", inc}});
  }
  return {{"version", kToolVersion},
          {"columns", r.columns},
          {"rows", rows},
          {"unnormalized", r.unnormalized},
          {"config_snapshot", r.config_snapshot}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.columns = j.at("columns").get<std::vector<std::string>>();
  r.config_snapshot = j.value("config_snapshot", json::object());
  r.unnormalized = j.value("unnormalized", std::vector<std::string>{});
  for (const auto& row : j.at("rows")) {
    EvalRow er;
    er.method = row.at("method").get<std::string>();
    er.count = row.at("count").get<std::size_t>();
    er.means = row.at("means").get<std::map<std::string, double>>();
    for (const auto& i : row.value("incomplete", json::array()))
      er.incomplete.push_back({i.at("paper_id").get<std::string>(), i.at("missing").get<std::vector<std::string>>()});
    r.rows.push_back(std::move(er));
  }
  return r;
}

namespace {

std::string header_for(const std::string& col) {
  if (col == "rouge_l") return "ROUGE-L";
  if (col == "geval") return "G-EVAL";
  if (col == "likert") return "GPTLikert";
  if (col == "composition.pros_cons") return "Comp(P/C)";
  if (col == "composition.consensus_controversy") return "Comp(C/C)";
  static const std::map<std::string, std::string> short_aspect = {
      {"discussion_involvement", "DI"}, {"opinion_faithfulness", "OF"}, {"decision_consistency", "DC"}};
  for (const auto& prefix : {std::string("geval."), std::string("likert.")}) {
    if (col.rfind(prefix, 0) == 0) {
      auto it = short_aspect.find(col.substr(prefix.size()));
      const std::string head = prefix == "geval." ? "G-EVAL" : "Likert";
      return head + "-" + (it == short_aspect.end() ? col.substr(prefix.size()) : it->second);
    }
  }
  return col;
}

}  // namespace

std::string render_table(const EvalReport& r) {
  std::vector<std::string> headers = {"Method", "N"};
  for (const auto& c : r.columns) headers.push_back(header_for(c));
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : r.rows) {
    std::vector<std::string> line = {row.method, std::to_string(row.count)};
    for (const auto& c : r.columns) {
      auto it = row.means.find(c);
      if (it == row.means.end()) {
        line.push_back("-");
      } else {
        std::ostringstream ss;
        ss << std::fixed << std::setprecision(3) << it->second;
        line.push_back(ss.str());
      }
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(headers.size());
  for (std::size_t i = 0; i < headers.size(); ++i) {
    width[i] = headers[i].size();
    for (const auto& l : cells) width[i] = std::max(width[i], l[i].size());
  }
  auto emit = [&](const std::vector<std::string>& l) {
    std::string s;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (i) s += "  ";
      s += i == 0 ? l[i] + std::string(width[i] - l[i].size(), ' ')
                  : std::string(width[i] - l[i].size(), ' ') + l[i];
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  std::string out = emit(headers);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& l : cells) out += emit(l);
  for (const auto& row : r.rows)
    for (const auto& i : row.incomplete)
      out += "incomplete: " + row.method + " " + i.paper_id + " missing " + join(i.missing, ",") + "\n";
  return out;
}

json score_line(const std::string& paper_id, const std::string& method, const std::string& metric,
                double raw, double normalized) {
  return {{"paper_id", paper_id}, {"method", method}, {"metric", metric}, {"raw", raw}, {"normalized", normalized}};
}

}  // namespace orsum::judge
