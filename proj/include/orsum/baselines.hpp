#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orsum/corpus.hpp"
#include "orsum/error.hpp"
#include "orsum/generation.hpp"
#include "orsum/templates.hpp"

namespace orsum::baselines {

class MissingExemplar : public Error {
public:
  using Error::Error;
};

class NoSentences : public Error {
public:
  using Error::Error;
};

// Default templates: vanilla, three_sent, icl, review. The literal
// instructions are "Generate a metareview" and
// "Summary of document in {n} sentences".
TemplateSet default_templates();

// Title, abstract and every review truncated to the session budget.
std::string render_reviews(const PaperRecord& paper, std::size_t cap, const TemplateSet& t);

GenerationTrace vanilla(const PaperRecord& paper, const SessionFactory& sessions,
                        const TemplateSet& templates = default_templates());

GenerationTrace three_sent(const PaperRecord& paper, const SessionFactory& sessions, int n = 3,
                           const TemplateSet& templates = default_templates());

struct Exemplar {
  std::vector<std::string> reviews;
  std::string metareview;
};

// JSON object {reviews: [string], metareview: string}.
Exemplar load_exemplar(const std::string& path);

GenerationTrace icl(const PaperRecord& paper, const std::optional<Exemplar>& exemplar,
                    const SessionFactory& sessions, const TemplateSet& templates = default_templates());

struct SentenceGraph {
  std::vector<std::string> sentences;
  std::vector<std::size_t> review_index;  // source review of each sentence
  Eigen::MatrixXd similarity;             // symmetric, unit diagonal, entries in [0,1]
};

// Term weights per sentence: tf * ln(1 + N / df), with N the sentence count.
// Terms are lowercased tokens with surrounding punctuation removed.
Eigen::MatrixXd tfidf_matrix(const std::vector<std::string>& sentences);

SentenceGraph build_sentence_graph(const PaperRecord& paper);

struct LexRankOptions {
  std::size_t budget = 6;
  double threshold = 0.1;
  double damping = 0.85;
  double tol = 1e-8;
  int max_iterations = 10000;
};

struct LexRankSummary {
  std::vector<std::string> sentences;  // selected, in original order
  std::vector<std::size_t> selected;   // indices into the graph
  Eigen::VectorXd centrality;
};

LexRankSummary lexrank_summary(const SentenceGraph& graph, const LexRankOptions& options);

// Extractive summary; no backend calls.
GenerationTrace lexrank(const PaperRecord& paper, const LexRankOptions& options = {});

}  // namespace orsum::baselines
