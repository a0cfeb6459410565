#include "orsum/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "orsum/textmetrics.hpp"

namespace orsum {

using nlohmann::json;

MalformedRecord::MalformedRecord(std::size_t line, std::string cause)
    : Error("line " + std::to_string(line) + ": " + cause), line_(line), cause_(std::move(cause)) {}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

const std::set<std::string, std::less<>> kRecordKeys = {
    "id", "url", "title", "abstract", "venue", "decision", "metareview", "reviews", "split"};
const std::set<std::string, std::less<>> kReviewKeys = {"reviewer", "text", "ratings", "official"};

std::string optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw std::invalid_argument(std::string("`") + key + "` must be a string");
  return it->get<std::string>();
}

Review review_from_json(const json& j, std::size_t index) {
  const std::string where = "reviews[" + std::to_string(index) + "]";
  if (!j.is_object()) throw std::invalid_argument(where + " is not an object");
  Review r;
  auto text = j.find("text");
  if (text == j.end() || !text->is_string())
    throw std::invalid_argument(where + " lacks string `text`");
  r.text = text->get<std::string>();
  if (trim(r.text).empty()) throw std::invalid_argument(where + " has empty `text`");
  r.reviewer_id = optional_string(j, "reviewer");
  if (auto off = j.find("official"); off != j.end() && !off->is_null()) {
    if (!off->is_boolean()) throw std::invalid_argument(where + ".official must be boolean");
    r.is_official = off->get<bool>();
  }
  if (auto rat = j.find("ratings"); rat != j.end() && !rat->is_null()) {
    if (!rat->is_object()) throw std::invalid_argument(where + ".ratings must be an object");
    for (const auto& [k, v] : rat->items()) {
      if (!v.is_number()) throw std::invalid_argument(where + ".ratings." + k + " is not numeric");
      r.ratings.emplace(k, v.get<double>());
    }
  }
  for (const auto& [k, v] : j.items())
    if (!kReviewKeys.contains(k)) r.extra[k] = v;
  return r;
}

json review_to_json(const Review& r) {
  json j = r.extra;
  j["reviewer"] = r.reviewer_id;
  j["text"] = r.text;
  j["official"] = r.is_official;
  json ratings = json::object();
  for (const auto& [k, v] : r.ratings) ratings[k] = v;
  j["ratings"] = std::move(ratings);
  return j;
}

}  // namespace

Decision Decision::parse(std::string_view label) {
  const std::string t = lower(trim(label));
  if (t == "accept") return accept();
  if (t == "reject") return reject();
  return {DecisionKind::Other, std::string(label)};
}

std::string Decision::outcome_word() const {
  switch (kind) {
    case DecisionKind::Accept:
      return "acceptance";
    case DecisionKind::Reject:
      return "rejection";
    case DecisionKind::Other:
      break;
  }
  const std::string l = lower(label);
  if (l.find("reject") != std::string::npos) return "rejection";
  if (l.find("accept") != std::string::npos) return "acceptance";
  return label;
}

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Validation:
      return "validation";
    case Split::Test:
      return "test";
    case Split::Unassigned:
      return "unassigned";
  }
  return "unassigned";
}

std::optional<Split> parse_split(std::string_view s) noexcept {
  if (s == "train") return Split::Train;
  if (s == "validation" || s == "val" || s == "dev") return Split::Validation;
  if (s == "test") return Split::Test;
  if (s == "unassigned" || s.empty()) return Split::Unassigned;
  return std::nullopt;
}

Corpus::Corpus(std::vector<PaperRecord> records, std::string provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
  std::set<std::string_view> seen;
  for (const auto& r : records_)
    if (!seen.insert(r.id).second) throw std::invalid_argument("duplicate record id: " + r.id);
}

const PaperRecord* Corpus::find(std::string_view id) const noexcept {
  for (const auto& r : records_)
    if (r.id == id) return &r;
  return nullptr;
}

std::vector<const PaperRecord*> Corpus::in_split(Split s) const {
  std::vector<const PaperRecord*> out;
  for (const auto& r : records_)
    if (r.split == s) out.push_back(&r);
  return out;
}

std::array<std::size_t, 4> Corpus::split_sizes() const noexcept {
  std::array<std::size_t, 4> sizes{};
  for (const auto& r : records_) ++sizes[static_cast<std::size_t>(r.split)];
  return sizes;
}

PaperRecord record_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not an object");
  PaperRecord r;
  auto id = j.find("id");
  if (id == j.end() || !id->is_string() || id->get<std::string>().empty())
    throw std::invalid_argument("missing string `id`");
  r.id = id->get<std::string>();
  auto reviews = j.find("reviews");
  if (reviews == j.end()) throw std::invalid_argument("missing `reviews`");
  if (!reviews->is_array()) throw std::invalid_argument("`reviews` must be an array");
  for (std::size_t i = 0; i < reviews->size(); ++i)
    r.reviews.push_back(review_from_json((*reviews)[i], i));

  r.url = optional_string(j, "url");
  r.title = optional_string(j, "title");
  r.abstract = optional_string(j, "abstract");
  r.venue = optional_string(j, "venue");
  r.decision = Decision::parse(optional_string(j, "decision"));
  if (auto m = j.find("metareview"); m != j.end() && !m->is_null()) {
    if (!m->is_string()) throw std::invalid_argument("`metareview` must be a string or null");
    r.metareview = m->get<std::string>();
  }
  const std::string split = optional_string(j, "split");
  auto s = parse_split(split);
  if (!s) throw std::invalid_argument("unknown split `" + split + "`");
  r.split = *s;
  for (const auto& [k, v] : j.items())
    if (!kRecordKeys.contains(k)) r.extra[k] = v;
  return r;
}

json record_to_json(const PaperRecord& r) {
  json j = r.extra;
  j["id"] = r.id;
  j["url"] = r.url;
  j["title"] = r.title;
  j["abstract"] = r.abstract;
  j["venue"] = r.venue;
  j["decision"] = r.decision.label;
  j["metareview"] = r.metareview ? json(*r.metareview) : json(nullptr);
  json reviews = json::array();
  for (const auto& rv : r.reviews) reviews.push_back(review_to_json(rv));
  j["reviews"] = std::move(reviews);
  j["split"] = std::string(to_string(r.split));
  return j;
}

ParseResult parse_corpus(std::istream& in, std::string provenance) {
  ParseResult result;
  std::vector<PaperRecord> records;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  std::size_t nonblank = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++nonblank;
    try {
      auto rec = record_from_json(json::parse(line));
      if (!ids.insert(rec.id).second) throw std::invalid_argument("duplicate id `" + rec.id + "`");
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      result.errors.emplace_back(lineno, std::string("invalid JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
      result.errors.emplace_back(lineno, e.what());
    }
  }
  if (nonblank == 0) throw EmptyInput();
  result.corpus = Corpus(std::move(records), std::move(provenance));
  return result;
}

ParseResult parse_corpus(std::string_view text, std::string provenance) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in, std::move(provenance));
}

ParseResult load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file: " + path);
  return parse_corpus(in, path);
}

std::string serialize(const Corpus& c) {
  std::string out;
  for (const auto& r : c.records()) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void write_corpus(const Corpus& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write corpus file: " + path);
  out << serialize(c);
}

FilterReport filter_records_reported(const Corpus& c) {
  FilterReport report;
  std::vector<PaperRecord> kept;
  for (const auto& r : c.records()) {
    if (!r.metareview) {
      report.dropped.push_back({r.id, "no meta-review"});
      continue;
    }
    const auto len = textmetrics::token_count(*r.metareview);
    if (len <= kMinMetareviewTokens) {
      report.dropped.push_back({r.id, "meta-review has " + std::to_string(len) + " tokens (needs > " +
                                          std::to_string(kMinMetareviewTokens) + ")"});
      continue;
    }
    PaperRecord copy = r;
    const auto before = copy.reviews.size();
    std::erase_if(copy.reviews, [](const Review& rv) { return !rv.is_official; });
    report.unofficial_reviews_removed += before - copy.reviews.size();
    if (copy.reviews.empty()) {
      report.dropped.push_back({r.id, "no official reviews"});
      continue;
    }
    kept.push_back(std::move(copy));
  }
  report.corpus = Corpus(std::move(kept), c.provenance());
  return report;
}

Corpus filter_records(const Corpus& c) { return filter_records_reported(c).corpus; }

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidRatios("split ratios must be finite and >= 0");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidRatios("split ratios sum to " + std::to_string(sum) + ", expected 1");

  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = ratios[i] * static_cast<double>(n);
    // Nudge against representation error so exact quotas are not floored
    // one short (e.g. 9890/10989 * 10989).
    counts[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainder[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

namespace {

// Uniform index in [0, bound) by rejection, so the permutation depends only
// on the mt19937_64 stream and not on the standard library's distributions.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

}  // namespace

Corpus assign_splits(const Corpus& c, std::uint64_t seed, const SplitRatios& ratios) {
  const auto counts = split_counts(c.size(), ratios);

  std::vector<PaperRecord> records = c.records();
  std::sort(records.begin(), records.end(),
            [](const PaperRecord& a, const PaperRecord& b) { return a.id < b.id; });

  std::vector<std::size_t> perm(records.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[bounded(rng, i)]);

  for (std::size_t k = 0; k < perm.size(); ++k) {
    Split s = k < counts[0]               ? Split::Train
              : k < counts[0] + counts[1] ? Split::Validation
                                          : Split::Test;
    records[perm[k]].split = s;
  }
  return Corpus(std::move(records), c.provenance());
}

}  // namespace orsum
