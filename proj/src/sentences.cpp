#include "orsum/sentences.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace orsum {

namespace {

constexpr std::array<std::string_view, 24> kAbbreviations = {
    "e.g", "i.e", "al", "fig", "figs", "eq", "eqs", "sec", "vs", "cf", "dr", "mr",
    "mrs", "ms", "prof", "no", "resp", "approx", "ref", "refs", "tab", "appx", "ch", "w.r.t"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// The word that ends at position `dot` (exclusive), lowercased, with any
// leading punctuation such as '(' removed.
std::string word_before(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(text[b - 1])) --b;
  std::string w(text.substr(b, dot - b));
  while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.front()))) w.erase(w.begin());
  for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return w;
}

bool guarded(std::string_view text, std::size_t dot) {
  const std::string w = word_before(text, dot);
  if (w.empty()) return false;
  if (w.size() == 1 && std::isalpha(static_cast<unsigned char>(w[0]))) return true;
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), w) != kAbbreviations.end();
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto piece = trim(text.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && is_space(text[i + 1])) {
      if (c == '.' && guarded(text, i)) continue;
      emit(i + 1);
    }
  }
  emit(text.size());
  return out;
}

}  // namespace orsum
