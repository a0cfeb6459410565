#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orsum/error.hpp"

namespace orsum {

class Corpus;

namespace textmetrics {

class TargetTooShort : public Error {
public:
  using Error::Error;
};
class EmptyCorpus : public Error {
public:
  using Error::Error;
};
class DegenerateVocabulary : public Error {
public:
  using Error::Error;
};
class EmptyInput : public Error {
public:
  using Error::Error;
};

/// Lowercased whitespace-delimited tokens. No token contains whitespace.
struct TokenSeq {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }
  auto begin() const noexcept { return tokens.begin(); }
  auto end() const noexcept { return tokens.end(); }

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

TokenSeq make_tokens(std::initializer_list<std::string_view> tokens);

/// Splits on maximal whitespace runs and lowercases ASCII letters.
TokenSeq tokenize(std::string_view text);

/// Count of whitespace tokens without materializing them.
std::size_t token_count(std::string_view text) noexcept;

/// All contiguous n-grams joined by a single space, in order.
std::vector<std::string> ngrams(const TokenSeq& seq, std::size_t n);

/// Fraction of the target's n-gram occurrences that appear in none of the
/// sources. Throws TargetTooShort when the target has fewer than n tokens.
double novel_ngram_ratio(const TokenSeq& target, std::span<const TokenSeq> sources,
                         std::size_t n = 4);

/// Shannon entropy in nats of the unigram distribution.
double entropy(const TokenSeq& d);

/// 1 - entropy(d) / ln(V) with V the number of distinct tokens.
double nid(const TokenSeq& d);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);
RougeScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

struct CorpusStats {
  std::size_t count_src = 0;
  std::size_t count_trg = 0;
  double mean_len_src = 0.0;
  double mean_len_trg = 0.0;
  double novel_ngram_ratio = 0.0;
  double nid = 0.0;
};

/// Aggregate statistics over every record of the corpus. Sources are the
/// records' reviews, targets are their meta-reviews; records without a
/// meta-review contribute sources only. NID is computed over the
/// concatenation of all review tokens.
CorpusStats corpus_stats(const Corpus& c, std::size_t n = 4);

}  // namespace textmetrics
}  // namespace orsum
