#include "orsum/textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_set>

#include "orsum/corpus.hpp"

namespace orsum::textmetrics {

namespace {

bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

TokenSeq make_tokens(std::initializer_list<std::string_view> tokens) {
  TokenSeq seq;
  for (auto t : tokens) seq.tokens.emplace_back(t);
  return seq;
}

TokenSeq tokenize(std::string_view text) {
  TokenSeq seq;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) {
      std::string tok(text.substr(start, i - start));
      for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      seq.tokens.push_back(std::move(tok));
    }
  }
  return seq;
}

std::size_t token_count(std::string_view text) noexcept {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    const bool sp = is_space(c);
    if (!sp && !in_token) ++n;
    in_token = !sp;
  }
  return n;
}

std::vector<std::string> ngrams(const TokenSeq& seq, std::size_t n) {
  std::vector<std::string> out;
  if (n == 0 || seq.size() < n) return out;
  out.reserve(seq.size() - n + 1);
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    std::string g = seq[i];
    for (std::size_t k = 1; k < n; ++k) {
      g += ' ';
      g += seq[i + k];
    }
    out.push_back(std::move(g));
  }
  return out;
}

double novel_ngram_ratio(const TokenSeq& target, std::span<const TokenSeq> sources, std::size_t n) {
  if (n == 0) throw std::invalid_argument("n-gram order must be >= 1");
  if (target.size() < n)
    throw TargetTooShort("target has " + std::to_string(target.size()) + " tokens, needs >= " +
                         std::to_string(n));
  std::unordered_set<std::string> seen;
  for (const auto& src : sources)
    for (auto& g : ngrams(src, n)) seen.insert(std::move(g));
  const auto grams = ngrams(target, n);
  const auto novel = std::count_if(grams.begin(), grams.end(),
                                   [&](const std::string& g) { return !seen.contains(g); });
  return static_cast<double>(novel) / static_cast<double>(grams.size());
}

namespace {

// Sorted by token so the summation order is fixed.
std::map<std::string_view, std::size_t> unigram_counts(const TokenSeq& d) {
  std::map<std::string_view, std::size_t> counts;
  for (const auto& t : d) ++counts[t];
  return counts;
}

double entropy_of(const std::map<std::string_view, std::size_t>& counts, std::size_t total) {
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (const auto& [tok, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double entropy(const TokenSeq& d) {
  if (d.empty()) throw EmptyCorpus("entropy of an empty token sequence");
  return entropy_of(unigram_counts(d), d.size());
}

double nid(const TokenSeq& d) {
  if (d.empty()) throw EmptyCorpus("nid of an empty token sequence");
  const auto counts = unigram_counts(d);
  if (counts.size() <= 1)
    throw DegenerateVocabulary("nid needs at least 2 distinct tokens, got " +
                               std::to_string(counts.size()));
  const double value =
      1.0 - entropy_of(counts, d.size()) / std::log(static_cast<double>(counts.size()));
  // Uniform distributions give entropy == ln V up to rounding.
  return std::clamp(value, 0.0, 1.0);
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty())
    throw EmptyInput("rouge_l requires non-empty candidate and reference");
  const double l = static_cast<double>(lcs_length(candidate, reference));
  RougeScore s;
  s.precision = l / static_cast<double>(candidate.size());
  s.recall = l / static_cast<double>(reference.size());
  const double denom = s.precision + s.recall;
  s.f1 = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  return s;
}

CorpusStats corpus_stats(const Corpus& c, std::size_t n) {
  if (c.empty()) throw EmptyCorpus("corpus_stats on an empty corpus");
  CorpusStats st;
  std::size_t src_tokens = 0;
  std::size_t trg_tokens = 0;
  double novel_sum = 0.0;
  std::size_t novel_count = 0;
  TokenSeq all_sources;

  for (const auto& rec : c.records()) {
    std::vector<TokenSeq> sources;
    sources.reserve(rec.reviews.size());
    for (const auto& rv : rec.reviews) {
      sources.push_back(tokenize(rv.text));
      src_tokens += sources.back().size();
      all_sources.tokens.insert(all_sources.tokens.end(), sources.back().begin(),
                                sources.back().end());
    }
    st.count_src += rec.reviews.size();
    if (!rec.metareview) continue;
    ++st.count_trg;
    const auto target = tokenize(*rec.metareview);
    trg_tokens += target.size();
    if (target.size() >= n) {
      novel_sum += novel_ngram_ratio(target, sources, n);
      ++novel_count;
    }
  }
  if (st.count_src > 0)
    st.mean_len_src = static_cast<double>(src_tokens) / static_cast<double>(st.count_src);
  if (st.count_trg > 0)
    st.mean_len_trg = static_cast<double>(trg_tokens) / static_cast<double>(st.count_trg);
  if (novel_count > 0) st.novel_ngram_ratio = novel_sum / static_cast<double>(novel_count);
  try {
    st.nid = nid(all_sources);
  } catch (const Error&) {
    st.nid = 0.0;  // fewer than two distinct source tokens
  }
  return st;
}

}  // namespace orsum::textmetrics
