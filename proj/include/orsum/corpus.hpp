#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orsum/error.hpp"

namespace orsum {

class MalformedRecord : public Error {
public:
  MalformedRecord(std::size_t line, std::string cause);
  std::size_t line() const noexcept { return line_; }
  const std::string& cause() const noexcept { return cause_; }

private:
  std::size_t line_;
  std::string cause_;
};

class EmptyInput : public Error {
public:
  EmptyInput() : Error("input contains no records") {}
};

class InvalidRatios : public Error {
public:
  using Error::Error;
};

enum class DecisionKind { Accept, Reject, Other };

struct Decision {
  DecisionKind kind = DecisionKind::Other;
  std::string label;  // original wording for Other; canonical for Accept/Reject

  static Decision parse(std::string_view label);
  static Decision accept() { return {DecisionKind::Accept, "Accept"}; }
  static Decision reject() { return {DecisionKind::Reject, "Reject"}; }

  // "acceptance" / "rejection", falling back to the label when neither
  // word can be inferred from it.
  std::string outcome_word() const;

  friend bool operator==(const Decision&, const Decision&) = default;
};

enum class Split { Train, Validation, Test, Unassigned };

std::string_view to_string(Split s) noexcept;
std::optional<Split> parse_split(std::string_view s) noexcept;

struct Review {
  std::string reviewer_id;
  std::string text;
  std::map<std::string, double> ratings;
  bool is_official = true;
  nlohmann::json extra = nlohmann::json::object();  // unknown keys, kept verbatim

  friend bool operator==(const Review&, const Review&) = default;
};

struct PaperRecord {
  std::string id;
  std::string url;
  std::string title;
  std::string abstract;
  std::string venue;
  Decision decision;
  std::vector<Review> reviews;
  std::optional<std::string> metareview;
  Split split = Split::Unassigned;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

class Corpus {
public:
  Corpus() = default;
  // Throws std::invalid_argument on duplicate ids.
  Corpus(std::vector<PaperRecord> records, std::string provenance);

  const std::vector<PaperRecord>& records() const noexcept { return records_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const PaperRecord* find(std::string_view id) const noexcept;

  // Records in the given split, in corpus order.
  std::vector<const PaperRecord*> in_split(Split s) const;
  std::array<std::size_t, 4> split_sizes() const noexcept;

  friend bool operator==(const Corpus&, const Corpus&) = default;

private:
  std::vector<PaperRecord> records_;
  std::string provenance_;
};

struct ParseResult {
  Corpus corpus;
  std::vector<MalformedRecord> errors;
};

// Line-delimited records. Blank lines are ignored; every other line must
// hold one record object. Invalid lines are reported and skipped.
ParseResult parse_corpus(std::istream& in, std::string provenance = {});
ParseResult parse_corpus(std::string_view text, std::string provenance = {});
ParseResult load_corpus(const std::string& path);

PaperRecord record_from_json(const nlohmann::json& j);
nlohmann::json record_to_json(const PaperRecord& r);

// Canonical form: one compact object per line, keys sorted, '\n' after each.
std::string serialize(const Corpus& c);
void write_corpus(const Corpus& c, const std::string& path);

struct DroppedRecord {
  std::string id;
  std::string reason;
};

struct FilterReport {
  Corpus corpus;
  std::vector<DroppedRecord> dropped;
  std::size_t unofficial_reviews_removed = 0;
};

inline constexpr std::size_t kMinMetareviewTokens = 20;

// Keeps records whose meta-review has more than 20 whitespace tokens and at
// least one official review; drops unofficial reviews from survivors.
FilterReport filter_records_reported(const Corpus& c);
Corpus filter_records(const Corpus& c);

using SplitRatios = std::array<double, 3>;  // train, validation, test

// Paper-size split: 9,890 / 549 / 550 out of 10,989.
inline constexpr SplitRatios kOrsumRatios = {9890.0 / 10989.0, 549.0 / 10989.0,
                                             550.0 / 10989.0};

// Largest-remainder allocation of n items over the ratios.
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios);

// Seeded shuffle of the id-sorted records, then contiguous allocation in
// train/validation/test order. Output records are id-sorted.
Corpus assign_splits(const Corpus& c, std::uint64_t seed, const SplitRatios& ratios);

}  // namespace orsum
