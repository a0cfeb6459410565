#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace orsum {

// Splits after '.', '!' or '?' when followed by whitespace, unless the word
// ending in '.' is a known abbreviation or a single-letter initial.
// Sentences are trimmed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace orsum
