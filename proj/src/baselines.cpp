#include "orsum/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "orsum/lexrank.hpp"
#include "orsum/sentences.hpp"
#include "orsum/textmetrics.hpp"

namespace orsum::baselines {

using llm::ChatMessage;
using llm::MessageTag;
using nlohmann::json;

TemplateSet default_templates() {
  return TemplateSet({
      {"review", "Review by {reviewer}:\n{review_text}"},
      {"vanilla", "{reviews}\n\nGenerate a metareview"},
      {"three_sent", "{reviews}\n\nSummary of document in {n} sentences"},
      {"icl",
       "Here is an example of reviews and a high-quality meta-review written for them.\n\n"
       "Example reviews:\n{exemplar_reviews}\n\nExample meta-review:\n{exemplar_metareview}\n\n"
       "Now write a meta-review for the following paper in the same way.\n\n"
       "{reviews}\n\nGenerate a metareview"},
  });
}

std::string render_reviews(const PaperRecord& paper, std::size_t cap, const TemplateSet& t) {
  std::string out = "Paper title: " + paper.title + "\n\nAbstract: " + paper.abstract;
  const auto labels = reviewer_labels(paper);
  for (std::size_t i = 0; i < paper.reviews.size(); ++i) {
    out += "\n\n";
    out += render(t.get("review"), {{"reviewer", labels[i]},
                                    {"review_text", llm::truncate_review(paper.reviews[i].text, cap)}});
  }
  return out;
}

namespace {

GenerationTrace single_exchange(const PaperRecord& paper, Method method, const SessionFactory& sessions,
                                std::string prompt, json snapshot) {
  GenerationTrace trace;
  trace.paper_id = paper.id;
  trace.method = method;
  snapshot["truncation_cap"] = sessions.budget.per_review_token_cap;
  snapshot["model"] = sessions.request.model;
  snapshot["temperature"] = sessions.request.temperature;
  trace.config_snapshot = std::move(snapshot);
  auto session = sessions.open();
  try {
    auto reply = session.send(ChatMessage::user(std::move(prompt)), MessageTag::Draft);
    trace.drafts.push_back(reply.content);
  } catch (const std::exception& e) {
    trace.status = {false, error_kind(e), e.what(), std::string(to_string(method))};
  }
  trace.exchanges = session.transcript();
  return trace;
}

void require_reviews(const PaperRecord& paper) {
  if (paper.reviews.empty()) throw std::invalid_argument("paper " + paper.id + " has no reviews");
}

}  // namespace

GenerationTrace vanilla(const PaperRecord& paper, const SessionFactory& sessions,
                        const TemplateSet& templates) {
  require_reviews(paper);
  const auto prompt = render(templates.get("vanilla"),
                             {{"reviews", render_reviews(paper, sessions.budget.per_review_token_cap, templates)}});
  return single_exchange(paper, Method::Vanilla, sessions, prompt, json::object());
}

GenerationTrace three_sent(const PaperRecord& paper, const SessionFactory& sessions, int n,
                           const TemplateSet& templates) {
  require_reviews(paper);
  if (n < 1) throw std::invalid_argument("sentence count must be >= 1");
  const auto prompt = render(templates.get("three_sent"),
                             {{"reviews", render_reviews(paper, sessions.budget.per_review_token_cap, templates)},
                              {"n", std::to_string(n)}});
  return single_exchange(paper, Method::ThreeSent, sessions, prompt, {{"sentences", n}});
}

Exemplar load_exemplar(const std::string& path) {
  if (path.empty()) throw MissingExemplar("no exemplar path configured");
  std::ifstream in(path);
  if (!in) throw MissingExemplar("exemplar file not found: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw MissingExemplar("exemplar file is not valid JSON: " + std::string(e.what()));
  }
  Exemplar ex;
  if (!j.is_object() || !j.contains("reviews") || !j["reviews"].is_array() ||
      !j.contains("metareview") || !j["metareview"].is_string())
    throw MissingExemplar("exemplar must be {reviews: [string], metareview: string}");
  for (const auto& r : j["reviews"]) ex.reviews.push_back(r.get<std::string>());
  ex.metareview = j["metareview"].get<std::string>();
  return ex;
}

GenerationTrace icl(const PaperRecord& paper, const std::optional<Exemplar>& exemplar,
                    const SessionFactory& sessions, const TemplateSet& templates) {
  require_reviews(paper);
  if (!exemplar) throw MissingExemplar("ICL needs an exemplar");
  const auto cap = sessions.budget.per_review_token_cap;
  std::string ex_reviews;
  for (std::size_t i = 0; i < exemplar->reviews.size(); ++i) {
    if (i) ex_reviews += "\n\n";
    ex_reviews += render(templates.get("review"),
                         {{"reviewer", "Reviewer_" + std::to_string(i + 1)},
                          {"review_text", llm::truncate_review(exemplar->reviews[i], cap)}});
  }
  const auto prompt = render(templates.get("icl"), {{"exemplar_reviews", ex_reviews},
                                                    {"exemplar_metareview", exemplar->metareview},
                                                    {"reviews", render_reviews(paper, cap, templates)}});
  return single_exchange(paper, Method::ICL, sessions, prompt, {{"exemplar", true}});
}

// ---------------------------------------------------------------------------
// LexRank

namespace {

std::vector<std::string> terms(const std::string& sentence) {
  std::vector<std::string> out;
  for (auto tok : textmetrics::tokenize(sentence)) {
    auto b = std::find_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isalnum(c); });
    auto e = std::find_if(tok.rbegin(), tok.rend(), [](unsigned char c) { return std::isalnum(c); }).base();
    if (b < e) out.emplace_back(b, e);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd tfidf_matrix(const std::vector<std::string>& sentences) {
  std::map<std::string, Eigen::Index> vocab;
  std::vector<std::vector<std::string>> docs;
  docs.reserve(sentences.size());
  for (const auto& s : sentences) {
    docs.push_back(terms(s));
    for (const auto& t : docs.back()) vocab.emplace(t, 0);
  }
  Eigen::Index k = 0;
  for (auto& [t, idx] : vocab) idx = k++;

  const Eigen::Index n = static_cast<Eigen::Index>(sentences.size());
  Eigen::MatrixXd tf = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (const auto& t : docs[static_cast<std::size_t>(i)]) tf(i, vocab[t]) += 1.0;

  const Eigen::RowVectorXd df = (tf.array() > 0.0).cast<double>().colwise().sum();
  const Eigen::RowVectorXd idf = (1.0 + static_cast<double>(n) / df.array()).log();
  return tf * idf.asDiagonal();
}

SentenceGraph build_sentence_graph(const PaperRecord& paper) {
  SentenceGraph g;
  for (std::size_t r = 0; r < paper.reviews.size(); ++r) {
    for (auto& s : split_sentences(paper.reviews[r].text)) {
      g.sentences.push_back(std::move(s));
      g.review_index.push_back(r);
    }
  }
  if (g.sentences.empty()) throw NoSentences("paper " + paper.id + " has no review sentences");
  g.similarity = lexrank::cosine_similarity(tfidf_matrix(g.sentences));
  return g;
}

LexRankSummary lexrank_summary(const SentenceGraph& graph, const LexRankOptions& options) {
  if (graph.sentences.empty()) throw NoSentences("empty sentence graph");
  auto c = lexrank::centrality(graph.similarity, options.threshold, options.damping, options.tol,
                               options.max_iterations);
  LexRankSummary out;
  out.centrality = std::move(c.scores);

  std::vector<std::size_t> order(graph.sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.centrality(static_cast<Eigen::Index>(a)) > out.centrality(static_cast<Eigen::Index>(b));
  });
  order.resize(std::min(options.budget, order.size()));
  std::sort(order.begin(), order.end());
  out.selected = order;
  for (auto i : order) out.sentences.push_back(graph.sentences[i]);
  return out;
}

GenerationTrace lexrank(const PaperRecord& paper, const LexRankOptions& options) {
  GenerationTrace trace;
  trace.paper_id = paper.id;
  trace.method = Method::LexRank;
  trace.config_snapshot = {{"budget", options.budget},
                           {"threshold", options.threshold},
                           {"damping", options.damping},
                           {"tol", options.tol}};
  try {
    const auto graph = build_sentence_graph(paper);
    const auto summary = lexrank_summary(graph, options);
    std::string text;
    for (const auto& s : summary.sentences) {
      if (!text.empty()) text += ' ';
      text += s;
    }
    trace.drafts.push_back(std::move(text));
    trace.artifacts["selected"] = summary.selected;
    trace.artifacts["sentence_count"] = graph.sentences.size();
  } catch (const std::exception& e) {
    trace.status = {false, error_kind(e), e.what(), "lexrank"};
  }
  return trace;
}

}  // namespace orsum::baselines
