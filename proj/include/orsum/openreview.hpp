#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "orsum/error.hpp"

// Best-effort client for the OpenReview notes API. Fetched pages are stored
// verbatim; records are produced from the archive and still have to pass
// parse_corpus before anything else uses them.
namespace orsum::openreview {

class NetworkError : public Error {
public:
  using Error::Error;
};

class AuthRequired : public Error {
public:
  using Error::Error;
};

struct FetchSpec {
  std::string venue_id;                            // e.g. ICLR.cc/2023/Conference
  std::string endpoint = "https://api2.openreview.net";
  std::size_t page_size = 1000;
  std::size_t max_concurrent_pages = 2;
  std::string token_env = "OPENREVIEW_TOKEN";      // optional bearer token
  int timeout_seconds = 60;
};

struct FetchResult {
  std::vector<std::string> page_files;  // relative to the archive dir
  std::size_t note_count = 0;
};

// Writes page-<k>.json files and manifest.json ({note_id: file}) into
// `archive_dir`. Throws NetworkError or AuthRequired.
FetchResult fetch_openreview(const FetchSpec& spec, const std::string& archive_dir);

struct SchemaDrift {
  std::string note_id;
  std::string file;
  std::string reason;
};

struct Conversion {
  std::vector<nlohmann::json> records;  // corpus-file objects, manifest order
  std::vector<SchemaDrift> skipped;
};

// One raw note (with details.replies) to a corpus-file object. Throws Error
// describing the missing field when the note lacks an id or title.
nlohmann::json note_to_record(const nlohmann::json& note, const std::string& venue_id);

Conversion archive_to_records(const std::string& archive_dir);

// Records as line-delimited text for parse_corpus.
std::string records_to_text(const std::vector<nlohmann::json>& records);

}  // namespace orsum::openreview
