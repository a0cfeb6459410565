#include "orsum/cgi2.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

namespace orsum::cgi2 {

using llm::ChatMessage;
using llm::ChatSession;
using llm::MessageTag;
using nlohmann::json;

ParseFailure::ParseFailure(std::string cause, std::string raw_reply)
    : Error("could not parse reply: " + cause), cause_(std::move(cause)), raw_(std::move(raw_reply)) {}

std::string_view to_string(Sentiment s) noexcept {
  switch (s) {
    case Sentiment::Positive:
      return "positive";
    case Sentiment::Negative:
      return "negative";
    case Sentiment::Mixed:
      return "mixed";
  }
  return "mixed";
}

// ---------------------------------------------------------------------------
// Checklist

std::string ChecklistItem::for_decision(const std::string& outcome_word) const {
  std::string q = question;
  for (std::string_view slot : {std::string_view("acceptance/rejection"), std::string_view("{decision}")}) {
    for (auto pos = q.find(slot); pos != std::string::npos; pos = q.find(slot, pos + outcome_word.size()))
      q.replace(pos, slot.size(), outcome_word);
  }
  return q;
}

const Checklist& default_checklist() {
  static const Checklist items = {
      {1,
       "Are the most important advantages and disadvantages discussed in the above meta-review? "
       "If not, how can it be improved?"},
      {2,
       "Are the most important consensus and controversy discussed in the above meta-review? If "
       "not, how can it be improved?"},
      {3,
       "Is the above meta-review contradicting reviewers' comments? If so, how can it be "
       "improved?"},
      {4,
       "Is the above meta-review supporting the acceptance/rejection decision? If not, how can it "
       "be improved?"},
  };
  return items;
}

Checklist parse_checklist(std::string_view text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  auto blank = [](const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; };
  while (!lines.empty() && blank(lines.back())) lines.pop_back();
  if (lines.empty()) throw InvalidChecklist("checklist has no questions");
  Checklist out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i]))
      throw InvalidChecklist("blank line " + std::to_string(i + 1) + " inside checklist");
    auto b = lines[i].find_first_not_of(" \t");
    auto e = lines[i].find_last_not_of(" \t");
    out.push_back({i + 1, lines[i].substr(b, e - b + 1)});
  }
  return out;
}

Checklist load_checklist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidChecklist("cannot open checklist file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checklist(ss.str());
}

// ---------------------------------------------------------------------------
// Templates

TemplateSet default_templates() {
  return TemplateSet({
      {"system",
       "You are an experienced area chair. You write meta-reviews that weigh the reviewers' "
       "opinions against each other, ground every claim in evidence from the reviews, and "
       "support the final decision."},
      {"paper", "Paper title: {title}\n\nAbstract: {abstract}"},
      {"review", "Review by {reviewer}:\n{review_text}"},
      {"extract_opinions",
       "List the opinions expressed in the review by {reviewer} above, ranked from most to least "
       "important. Give each opinion's aspect, its sentiment (positive, negative or mixed), a "
       "one-sentence statement, and the evidence quoted or paraphrased from the review.\n"
       "Use exactly this format, one numbered block per opinion:\n"
       "1. Aspect: <aspect>\n"
       "   Sentiment: <positive|negative|mixed>\n"
       "   Statement: <opinion>\n"
       "   Evidence: <quote or paraphrase>"},
      {"pros_cons",
       "Using the opinions extracted above, list the most important strengths and weaknesses of "
       "the paper. For each one name the reviewers who raised it, using the reviewer ids exactly "
       "as given, and the evidence.\n"
       "Use exactly this format:\n"
       "Strengths:\n"
       "1. Statement: <strength>\n"
       "   Reviewers: <id>, <id>\n"
       "   Evidence: <evidence>\n"
       "Weaknesses:\n"
       "1. Statement: <weakness>\n"
       "   Reviewers: <id>\n"
       "   Evidence: <evidence>"},
      {"consensus_controversy",
       "Using the opinions above, list the consensuses (points on which at least two reviewers "
       "agree) and the controversies (points on which reviewers disagree), with the reviewers "
       "and the evidence for each.\n"
       "Use exactly this format, and write \"none\" under a heading with no entries:\n"
       "Consensus:\n"
       "1. Statement: <shared view>\n"
       "   Reviewers: <id>, <id>\n"
       "   Evidence: <evidence>\n"
       "Controversy:\n"
       "1. Statement: <disputed point>\n"
       "   For: <ids of reviewers on the favourable side>\n"
       "   Against: <ids of reviewers on the critical side>\n"
       "   Evidence: <evidence>"},
      {"draft",
       "The decision for this paper is {decision}. Based on the discussion above, write a "
       "meta-review that covers the main strengths and weaknesses and the consensuses and "
       "controversies among the reviewers with their evidence, and that justifies the "
       "{decision} decision. Reply with the meta-review text only."},
      {"feedback", "{question}"},
      {"revise",
       "Revise the meta-review so that it addresses your feedback above. Reply with the revised "
       "meta-review text only."},
      {"reask",
       "Your previous reply did not follow the required format ({error}). Give the same answer "
       "again using exactly the format requested above."},
  });
}

// ---------------------------------------------------------------------------
// Labeled-list replies

namespace {

struct Field {
  std::string label;
  std::string value;
};

struct Item {
  std::vector<Field> fields;

  const std::string* find(std::string_view label) const {
    for (const auto& f : fields)
      if (f.label == label) return &f.value;
    return nullptr;
  }
};

struct Section {
  std::string heading;
  std::vector<Item> items;
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_markdown(std::string_view line) {
  std::string s;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '*' || line[i] == '_') && i + 1 < line.size() && line[i + 1] == line[i]) {
      ++i;
      continue;
    }
    s += line[i];
  }
  s = trim(s);
  while (!s.empty() && (s[0] == '#' || s[0] == '>')) s = trim(s.substr(1));
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*') && s[1] == ' ') s = trim(s.substr(2));
  if (s.rfind("\xE2\x80\xA2", 0) == 0) s = trim(s.substr(3));  // bullet
  return s;
}

std::optional<std::string> heading_of(const std::string& cleaned) {
  std::string h = lower(cleaned);
  while (!h.empty() && (h.back() == ':' || h.back() == '.')) h.pop_back();
  h = trim(h);
  static const std::vector<std::pair<std::string, std::vector<std::string>>> aliases = {
      {"strengths", {"strengths", "strength", "advantages", "pros"}},
      {"weaknesses", {"weaknesses", "weakness", "disadvantages", "cons"}},
      {"consensus", {"consensus", "consensuses", "agreements"}},
      {"controversy", {"controversy", "controversies", "disagreements"}},
  };
  for (const auto& [canon, names] : aliases)
    if (std::find(names.begin(), names.end(), h) != names.end()) return canon;
  return std::nullopt;
}

std::optional<std::string> field_label(std::string_view raw) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> aliases = {
      {"aspect", {"aspect"}},
      {"sentiment", {"sentiment", "polarity"}},
      {"statement", {"statement", "opinion", "point"}},
      {"evidence", {"evidence", "quote"}},
      {"reviewers", {"reviewers", "reviewer", "raised by"}},
      {"for", {"for", "in favor", "in favour", "supporting"}},
      {"against", {"against", "opposing", "opposed"}},
  };
  const std::string l = lower(trim(raw));
  for (const auto& [canon, names] : aliases)
    if (std::find(names.begin(), names.end(), l) != names.end()) return canon;
  return std::nullopt;
}

bool is_none(const std::string& s) {
  const std::string l = lower(s);
  return l == "none" || l == "none." || l == "n/a" || l == "-";
}

std::vector<Section> parse_labeled(std::string_view reply) {
  static const std::regex numbered(R"(^\(?(\d+)[.)]\s*(.*)$)");
  static const std::regex labeled(R"(^([A-Za-z][A-Za-z ]{0,15}?)\s*:\s*(.*)$)");

  std::vector<Section> sections(1);
  Item* current = nullptr;
  std::istringstream in{std::string(reply)};
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = strip_markdown(raw);
    if (line.empty()) continue;

    std::smatch m;
    if (auto h = heading_of(line)) {
      sections.push_back({*h, {}});
      current = nullptr;
      continue;
    }
    if (std::regex_match(line, m, labeled)) {
      // "Strengths: none" style headings
      if (auto h = heading_of(m[1].str())) {
        sections.push_back({*h, {}});
        current = nullptr;
        continue;
      }
    }
    if (is_none(line)) continue;

    bool fresh = false;
    if (std::regex_match(line, m, numbered)) {
      sections.back().items.emplace_back();
      current = &sections.back().items.back();
      fresh = true;
      line = strip_markdown(m[2].str());
      if (line.empty()) continue;
    }
    if (std::regex_match(line, m, labeled)) {
      if (auto label = field_label(m[1].str())) {
        if (!current || (!fresh && current->find(*label))) {
          sections.back().items.emplace_back();
          current = &sections.back().items.back();
        }
        current->fields.push_back({*label, trim(m[2].str())});
        continue;
      }
    }
    if (!current) continue;  // preamble
    if (fresh || current->fields.empty()) {
      current->fields.push_back({"statement", line});
    } else {
      auto& v = current->fields.back().value;
      v += v.empty() ? line : " " + line;
    }
  }
  std::erase_if(sections, [](const Section& s) { return s.heading.empty() && s.items.empty(); });
  return sections;
}

std::string canon_id(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string resolve_reviewer(const std::string& name, const std::vector<std::string>& labels,
                             std::string_view reply) {
  const std::string key = canon_id(name);
  for (const auto& l : labels)
    if (canon_id(l) == key) return l;
  throw ParseFailure("unknown reviewer `" + name + "`", std::string(reply));
}

std::vector<std::string> parse_reviewer_list(const std::string& value,
                                             const std::vector<std::string>& labels,
                                             std::string_view reply) {
  static const std::regex sep(R"(\s*(?:,|;|/|&|\band\b)\s*)");
  std::vector<std::string> out;
  std::sregex_token_iterator it(value.begin(), value.end(), sep, -1), end;
  for (; it != end; ++it) {
    std::string name = trim(it->str());
    while (!name.empty() && (name.back() == '.' || name.back() == ')')) name.pop_back();
    if (!name.empty() && name.front() == '(') name.erase(name.begin());
    if (name.empty()) continue;
    auto id = resolve_reviewer(name, labels, reply);
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(std::move(id));
  }
  return out;
}

const std::string& require(const Item& item, std::string_view label, std::string_view what,
                           std::string_view reply) {
  const auto* v = item.find(label);
  if (!v || v->empty())
    throw ParseFailure(std::string(what) + " lacks `" + std::string(label) + "`", std::string(reply));
  return *v;
}

const Section* find_section(const std::vector<Section>& sections, std::string_view heading) {
  for (const auto& s : sections)
    if (s.heading == heading) return &s;
  return nullptr;
}

DiscussionPoint parse_point(const Item& item, std::string_view what,
                            const std::vector<std::string>& labels, std::string_view reply,
                            std::size_t min_reviewers) {
  DiscussionPoint p;
  p.statement = require(item, "statement", what, reply);
  p.evidence = require(item, "evidence", what, reply);
  p.reviewers = parse_reviewer_list(require(item, "reviewers", what, reply), labels, reply);
  if (p.reviewers.size() < min_reviewers)
    throw ParseFailure(std::string(what) + " must cite at least " + std::to_string(min_reviewers) +
                           " reviewers",
                       std::string(reply));
  return p;
}

DiscussionPoint parse_controversy(const Item& item, const std::vector<std::string>& labels,
                                  std::string_view reply) {
  DiscussionPoint p;
  p.statement = require(item, "statement", "controversy", reply);
  p.evidence = require(item, "evidence", "controversy", reply);
  auto pro = parse_reviewer_list(require(item, "for", "controversy", reply), labels, reply);
  auto con = parse_reviewer_list(require(item, "against", "controversy", reply), labels, reply);
  for (const auto& r : pro)
    if (std::find(con.begin(), con.end(), r) != con.end())
      throw ParseFailure("reviewer " + r + " is on both sides of a controversy", std::string(reply));
  if (pro.empty() || con.empty())
    throw ParseFailure("controversy needs reviewers on both sides", std::string(reply));
  p.reviewers = pro;
  p.reviewers.insert(p.reviewers.end(), con.begin(), con.end());
  p.against = std::move(con);
  return p;
}

}  // namespace

std::vector<OpinionItem> parse_opinions(std::string_view reply, const std::string& reviewer,
                                        const std::vector<std::string>& labels) {
  std::vector<OpinionItem> out;
  for (const auto& section : parse_labeled(reply)) {
    for (const auto& item : section.items) {
      OpinionItem o;
      o.reviewer_id = reviewer;
      if (const auto* who = item.find("reviewers"); who && !who->empty()) {
        auto ids = parse_reviewer_list(*who, labels, reply);
        if (ids.size() != 1 || ids[0] != reviewer)
          throw ParseFailure("opinion attributed to `" + *who + "`, expected " + reviewer,
                             std::string(reply));
      }
      o.aspect = require(item, "aspect", "opinion", reply);
      o.statement = require(item, "statement", "opinion", reply);
      o.evidence = require(item, "evidence", "opinion", reply);
      std::string s = lower(require(item, "sentiment", "opinion", reply));
      while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back()))) s.pop_back();
      if (s == "positive") o.sentiment = Sentiment::Positive;
      else if (s == "negative") o.sentiment = Sentiment::Negative;
      else if (s == "mixed") o.sentiment = Sentiment::Mixed;
      else throw ParseFailure("unknown sentiment `" + s + "`", std::string(reply));
      out.push_back(std::move(o));
    }
  }
  if (out.empty()) throw ParseFailure("no opinion items found", std::string(reply));
  return out;
}

ProsCons parse_pros_cons(std::string_view reply, const std::vector<std::string>& labels) {
  const auto sections = parse_labeled(reply);
  const auto* pros = find_section(sections, "strengths");
  const auto* cons = find_section(sections, "weaknesses");
  if (!pros || !cons) throw ParseFailure("missing Strengths or Weaknesses heading", std::string(reply));
  ProsCons out;
  for (const auto& item : pros->items) out.strengths.push_back(parse_point(item, "strength", labels, reply, 1));
  for (const auto& item : cons->items) out.weaknesses.push_back(parse_point(item, "weakness", labels, reply, 1));
  if (out.strengths.empty() && out.weaknesses.empty())
    throw ParseFailure("no strengths or weaknesses listed", std::string(reply));
  return out;
}

ConsensusControversy parse_consensus_controversy(std::string_view reply,
                                                 const std::vector<std::string>& labels) {
  const auto sections = parse_labeled(reply);
  const auto* agree = find_section(sections, "consensus");
  const auto* dispute = find_section(sections, "controversy");
  if (!agree || !dispute)
    throw ParseFailure("missing Consensus or Controversy heading", std::string(reply));
  ConsensusControversy out;
  for (const auto& item : agree->items)
    out.consensuses.push_back(parse_point(item, "consensus", labels, reply, 2));
  for (const auto& item : dispute->items) out.controversies.push_back(parse_controversy(item, labels, reply));
  return out;
}

std::string render_opinions(const std::vector<OpinionItem>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& o = items[i];
    out += std::to_string(i + 1) + ". [" + o.reviewer_id + "] " + o.aspect + " (" +
           std::string(to_string(o.sentiment)) + "): " + o.statement + " Evidence: " + o.evidence + "\n";
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& xs, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

void render_points(std::string& out, std::string_view heading, const std::vector<DiscussionPoint>& pts) {
  out += std::string(heading) + ":\n";
  if (pts.empty()) out += "none\n";
  for (std::size_t i = 0; i < pts.size(); ++i)
    out += std::to_string(i + 1) + ". " + pts[i].statement + " (" + join(pts[i].reviewers, ", ") +
           ") Evidence: " + pts[i].evidence + "\n";
}

json points_json(const std::vector<DiscussionPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) {
    json j = {{"statement", p.statement}, {"reviewers", p.reviewers}, {"evidence", p.evidence}};
    if (!p.against.empty()) j["against"] = p.against;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

std::string render_bundle(const DiscussionBundle& b) {
  std::string out;
  render_points(out, "Strengths", b.pros_cons.strengths);
  render_points(out, "Weaknesses", b.pros_cons.weaknesses);
  render_points(out, "Consensus", b.agreement.consensuses);
  render_points(out, "Controversy", b.agreement.controversies);
  return out;
}

json to_json(const OpinionItem& o) {
  return {{"reviewer", o.reviewer_id},
          {"aspect", o.aspect},
          {"sentiment", to_string(o.sentiment)},
          {"statement", o.statement},
          {"evidence", o.evidence}};
}

json to_json(const DiscussionBundle& b) {
  return {{"strengths", points_json(b.pros_cons.strengths)},
          {"weaknesses", points_json(b.pros_cons.weaknesses)},
          {"consensuses", points_json(b.agreement.consensuses)},
          {"controversies", points_json(b.agreement.controversies)}};
}

// ---------------------------------------------------------------------------
// Steps

namespace {

Slots paper_slots(const StepContext& ctx) {
  return {{"title", ctx.paper->title},
          {"abstract", ctx.paper->abstract},
          {"decision", ctx.paper->decision.outcome_word()}};
}

template <typename Parse>
auto ask_structured(ChatSession& session, const StepContext& ctx, std::string prompt,
                    MessageTag reply_tag, Parse parse) {
  auto reply = session.send(ChatMessage::user(std::move(prompt)), reply_tag);
  try {
    return parse(reply.content);
  } catch (const ParseFailure& first) {
    Slots s = paper_slots(ctx);
    s["error"] = first.cause();
    auto again = session.send(ChatMessage::user(render(ctx.templates->get("reask"), s)), reply_tag);
    return parse(again.content);
  }
}

}  // namespace

std::vector<OpinionItem> extract_opinions(ChatSession& session, const StepContext& ctx,
                                          std::size_t review_index) {
  const auto& review = ctx.paper->reviews.at(review_index);
  const auto& who = ctx.labels.at(review_index);
  Slots s = paper_slots(ctx);
  s["reviewer"] = who;
  s["review_text"] = llm::truncate_review(review.text, session.budget().per_review_token_cap);
  session.add_context(ChatMessage::user(render(ctx.templates->get("review"), s), MessageTag::RawReview));
  return ask_structured(session, ctx, render(ctx.templates->get("extract_opinions"), s),
                        MessageTag::Discussion, [&](const std::string& reply) {
                          return parse_opinions(reply, who, ctx.labels);
                        });
}

ProsCons synthesize_pros_cons(ChatSession& session, const StepContext& ctx,
                              const std::vector<OpinionItem>& opinions) {
  Slots s = paper_slots(ctx);
  s["opinions"] = render_opinions(opinions);
  return ask_structured(session, ctx, render(ctx.templates->get("pros_cons"), s),
                        MessageTag::Discussion,
                        [&](const std::string& reply) { return parse_pros_cons(reply, ctx.labels); });
}

ConsensusControversy analyze_consensus_controversy(ChatSession& session, const StepContext& ctx,
                                                   const std::vector<OpinionItem>& opinions) {
  Slots s = paper_slots(ctx);
  s["opinions"] = render_opinions(opinions);
  return ask_structured(session, ctx, render(ctx.templates->get("consensus_controversy"), s),
                        MessageTag::Discussion, [&](const std::string& reply) {
                          return parse_consensus_controversy(reply, ctx.labels);
                        });
}

std::string draft_metareview(ChatSession& session, const StepContext& ctx,
                             const DiscussionBundle& bundle) {
  Slots s = paper_slots(ctx);
  s["bundle"] = render_bundle(bundle);
  auto reply = session.send(ChatMessage::user(render(ctx.templates->get("draft"), s)), MessageTag::Draft);
  return trim(reply.content);
}

Introspection introspect_step(ChatSession& session, const StepContext& ctx, const std::string& draft,
                              const ChecklistItem& item) {
  Slots s = paper_slots(ctx);
  s["draft"] = draft;
  s["question"] = item.for_decision(ctx.paper->decision.outcome_word());
  Introspection out;
  out.feedback = trim(
      session.send(ChatMessage::user(render(ctx.templates->get("feedback"), s)), MessageTag::Feedback)
          .content);
  s["feedback"] = out.feedback;
  out.revised_draft = trim(
      session.send(ChatMessage::user(render(ctx.templates->get("revise"), s)), MessageTag::Draft).content);
  return out;
}

GenerationTrace run_cgi2(const PaperRecord& paper, const Cgi2Options& options,
                         const SessionFactory& sessions) {
  if (paper.reviews.empty()) throw std::invalid_argument("paper " + paper.id + " has no reviews");
  if (options.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (options.checklist.empty()) throw InvalidChecklist("checklist has no questions");

  GenerationTrace trace;
  trace.paper_id = paper.id;
  trace.method = Method::CGI2;
  json checklist = json::array();
  for (const auto& item : options.checklist) checklist.push_back(item.question);
  trace.config_snapshot = {{"iterations", options.iterations},
                           {"checklist", checklist},
                           {"truncation_cap", sessions.budget.per_review_token_cap},
                           {"model", sessions.request.model},
                           {"temperature", sessions.request.temperature}};

  StepContext ctx{&paper, reviewer_labels(paper), &options.templates};
  ChatSession session = sessions.open();
  std::string step = "setup";
  json opinions_json = json::array();
  json feedback_json = json::array();
  try {
    session.add_context(ChatMessage::system(options.templates.get("system")));
    session.add_context(ChatMessage::user(render(options.templates.get("paper"), paper_slots(ctx))));

    std::vector<OpinionItem> opinions;
    for (std::size_t i = 0; i < paper.reviews.size(); ++i) {
      step = "extract_opinions[" + ctx.labels[i] + "]";
      auto items = extract_opinions(session, ctx, i);
      for (const auto& o : items) opinions_json.push_back(to_json(o));
      opinions.insert(opinions.end(), items.begin(), items.end());
    }
    trace.artifacts["opinions"] = opinions_json;

    DiscussionBundle bundle;
    step = "pros_cons";
    bundle.pros_cons = synthesize_pros_cons(session, ctx, opinions);
    step = "consensus_controversy";
    bundle.agreement = analyze_consensus_controversy(session, ctx, opinions);
    trace.artifacts["bundle"] = to_json(bundle);

    step = "draft";
    trace.drafts.push_back(draft_metareview(session, ctx, bundle));

    llm::prune_history(session);

    for (int it = 1; it <= options.iterations; ++it) {
      for (const auto& item : options.checklist) {
        step = "introspect[" + std::to_string(it) + "." + std::to_string(item.position) + "]";
        auto r = introspect_step(session, ctx, trace.drafts.back(), item);
        feedback_json.push_back({{"iteration", it}, {"position", item.position}, {"feedback", r.feedback}});
        trace.drafts.push_back(std::move(r.revised_draft));
      }
    }
    trace.artifacts["feedback"] = feedback_json;
  } catch (const std::exception& e) {
    trace.status = {false, error_kind(e), e.what(), step};
    if (!opinions_json.empty()) trace.artifacts["opinions"] = opinions_json;
    if (!feedback_json.empty()) trace.artifacts["feedback"] = feedback_json;
  }
  trace.exchanges = session.transcript();
  return trace;
}

}  // namespace orsum::cgi2
