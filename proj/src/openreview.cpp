#include "orsum/openreview.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "orsum/llm/http_backend.hpp"

namespace orsum::openreview {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string page_name(std::size_t k) {
  std::ostringstream ss;
  ss << "page-" << std::setw(4) << std::setfill('0') << k << ".json";
  return ss.str();
}

std::string get_page(const FetchSpec& spec, const std::string& token, std::size_t offset) {
  const auto url = llm::parse_url(spec.endpoint);
  httplib::Client client(url.origin());
  client.set_connection_timeout(spec.timeout_seconds, 0);
  client.set_read_timeout(spec.timeout_seconds, 0);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  std::string base = url.path == "/" ? "" : url.path;
  if (!base.empty() && base.back() == '/') base.pop_back();
  const std::string path = base + "/notes?content.venueid=" + httplib::detail::encode_query_param(spec.venue_id) +
                           "&details=replies&limit=" + std::to_string(spec.page_size) +
                           "&offset=" + std::to_string(offset);
  auto res = client.Get(path, headers);
  if (!res) throw NetworkError("GET " + spec.endpoint + path + " failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403)
    throw AuthRequired("OpenReview returned " + std::to_string(res->status) + "; set " + spec.token_env);
  if (res->status != 200)
    throw NetworkError("OpenReview returned HTTP " + std::to_string(res->status) + " for " + path);
  return res->body;
}

json parse_page(const std::string& body, const std::string& what) {
  try {
    auto j = json::parse(body);
    if (!j.is_object() || !j.contains("notes") || !j["notes"].is_array())
      throw NetworkError(what + " has no notes array");
    return j;
  } catch (const json::exception& e) {
    throw NetworkError(what + " is not JSON: " + e.what());
  }
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << body;
}

// API v2 wraps every content field as {value: ...}; v1 stores it directly.
const json* field(const json& content, std::string_view key) {
  auto it = content.find(key);
  if (it == content.end() || it->is_null()) return nullptr;
  if (it->is_object()) {
    auto v = it->find("value");
    return v == it->end() || v->is_null() ? nullptr : &*v;
  }
  return &*it;
}

std::string text_field(const json& content, std::string_view key) {
  const json* v = field(content, key);
  if (!v) return {};
  if (v->is_string()) return v->get<std::string>();
  return v->dump();
}

std::vector<std::string> invitations(const json& reply) {
  std::vector<std::string> out;
  if (auto it = reply.find("invitations"); it != reply.end() && it->is_array())
    for (const auto& s : *it)
      if (s.is_string()) out.push_back(s.get<std::string>());
  if (auto it = reply.find("invitation"); it != reply.end() && it->is_string()) out.push_back(it->get<std::string>());
  return out;
}

bool has_invitation(const json& reply, std::string_view suffix) {
  for (const auto& inv : invitations(reply))
    if (inv.size() >= suffix.size() && inv.compare(inv.size() - suffix.size(), suffix.size(), suffix) == 0)
      return true;
  return false;
}

std::string signature(const json& reply) {
  if (auto it = reply.find("signatures"); it != reply.end() && it->is_array() && !it->empty() &&
                                            (*it)[0].is_string()) {
    auto s = (*it)[0].get<std::string>();
    auto slash = s.find_last_of('/');
    return slash == std::string::npos ? s : s.substr(slash + 1);
  }
  return {};
}

// Leading number of "6: marginally above the acceptance threshold".
std::optional<double> rating_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) return std::nullopt;
  const auto s = v.get<std::string>();
  try {
    std::size_t used = 0;
    double d = std::stod(s, &used);
    if (used > 0) return d;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

json review_from_reply(const json& reply, bool official) {
  const json& c = reply.at("content");
  std::string text;
  if (official) {
    text = text_field(c, "review");
    if (text.empty()) {
      for (const char* part : {"summary", "strengths", "weaknesses", "strength_and_weaknesses",
                               "summary_of_the_paper", "main_review", "questions"}) {
        auto t = text_field(c, part);
        if (t.empty()) continue;
        if (!text.empty()) text += "\n\n";
        text += t;
      }
    }
  } else {
    text = text_field(c, "comment");
  }
  json ratings = json::object();
  for (const char* key : {"rating", "recommendation", "confidence", "soundness", "presentation", "contribution"})
    if (const json* v = field(c, key))
      if (auto d = rating_value(*v)) ratings[key] = *d;
  return {{"reviewer", signature(reply)}, {"text", text}, {"ratings", ratings}, {"official", official}};
}

}  // namespace

json note_to_record(const json& note, const std::string& venue_id) {
  if (!note.is_object() || !note.contains("id") || !note["id"].is_string())
    throw Error("note has no id");
  const std::string id = note["id"].get<std::string>();
  if (!note.contains("content") || !note["content"].is_object()) throw Error("note " + id + " has no content");
  const json& c = note["content"];
  const std::string title = text_field(c, "title");
  if (title.empty()) throw Error("note " + id + " has no title");

  json rec = {{"id", id},
              {"url", "https://openreview.net/forum?id=" + id},
              {"title", title},
              {"abstract", text_field(c, "abstract")},
              {"venue", text_field(c, "venue").empty() ? venue_id : text_field(c, "venue")},
              {"decision", ""},
              {"metareview", nullptr},
              {"reviews", json::array()}};

  const json* replies = nullptr;
  if (auto d = note.find("details"); d != note.end() && d->is_object())
    if (auto r = d->find("replies"); r != d->end() && r->is_array()) replies = &*r;
  if (!replies) return rec;

  for (const auto& reply : *replies) {
    if (!reply.is_object() || !reply.contains("content") || !reply["content"].is_object()) continue;
    const json& rc = reply["content"];
    if (has_invitation(reply, "Official_Review")) {
      auto r = review_from_reply(reply, true);
      if (!r["text"].get<std::string>().empty()) rec["reviews"].push_back(std::move(r));
    } else if (has_invitation(reply, "Public_Comment")) {
      auto r = review_from_reply(reply, false);
      if (!r["text"].get<std::string>().empty()) rec["reviews"].push_back(std::move(r));
    } else if (has_invitation(reply, "Meta_Review")) {
      for (const char* key : {"metareview", "meta_review", "summary"}) {
        auto t = text_field(rc, key);
        if (!t.empty()) {
          rec["metareview"] = t;
          break;
        }
      }
    } else if (has_invitation(reply, "Decision")) {
      rec["decision"] = text_field(rc, "decision");
    }
  }
  return rec;
}

FetchResult fetch_openreview(const FetchSpec& spec, const std::string& archive_dir) {
  if (spec.venue_id.empty()) throw std::invalid_argument("fetch needs a venue id");
  if (spec.page_size == 0) throw std::invalid_argument("page size must be >= 1");
  std::string token;
  if (!spec.token_env.empty())
    if (const char* t = std::getenv(spec.token_env.c_str())) token = t;

  fs::create_directories(archive_dir);
  const auto first_body = get_page(spec, token, 0);
  const auto first = parse_page(first_body, "page 0");
  std::size_t total = first.value("count", first["notes"].size());

  std::size_t pages = total == 0 ? 1 : (total + spec.page_size - 1) / spec.page_size;
  std::vector<std::string> bodies(pages);
  bodies[0] = first_body;

  std::atomic<std::size_t> next{1};
  std::mutex err_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t k = next++; k < pages; k = next++) {
      try {
        bodies[k] = get_page(spec, token, k * spec.page_size);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t n_threads = std::min(std::max<std::size_t>(spec.max_concurrent_pages, 1), pages - 1);
  for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  FetchResult result;
  json manifest = json::object();
  for (std::size_t k = 0; k < pages; ++k) {
    const auto name = page_name(k);
    write_file(fs::path(archive_dir) / name, bodies[k]);
    result.page_files.push_back(name);
    const auto page = parse_page(bodies[k], name);
    for (const auto& note : page["notes"]) {
      if (note.contains("id") && note["id"].is_string()) manifest[note["id"].get<std::string>()] = name;
      ++result.note_count;
    }
  }
  json meta = {{"venue_id", spec.venue_id}, {"endpoint", spec.endpoint}, {"notes", manifest}};
  write_file(fs::path(archive_dir) / "manifest.json", meta.dump(2) + "\n");
  return result;
}

Conversion archive_to_records(const std::string& archive_dir) {
  const fs::path dir(archive_dir);
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw Error("archive has no manifest.json: " + archive_dir);
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::exception& e) {
    throw Error("archive manifest is not JSON: " + std::string(e.what()));
  }
  const std::string venue = manifest.value("venue_id", "");

  Conversion out;
  std::vector<std::string> files;
  for (const auto& [id, file] : manifest.at("notes").items())
    if (std::find(files.begin(), files.end(), file.get<std::string>()) == files.end())
      files.push_back(file.get<std::string>());
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(dir / file);
    if (!in) throw Error("archive page missing: " + file);
    json page;
    try {
      page = json::parse(in);
    } catch (const json::exception& e) {
      throw Error("archive page " + file + " is not JSON: " + e.what());
    }
    for (const auto& note : page.value("notes", json::array())) {
      try {
        out.records.push_back(note_to_record(note, venue));
      } catch (const Error& e) {
        const bool has_id = note.is_object() && note.contains("id") && note["id"].is_string();
        out.skipped.push_back({has_id ? note["id"].get<std::string>() : std::string(), file, e.what()});
      }
    }
  }
  return out;
}

std::string records_to_text(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) out += r.dump() + "\n";
  return out;
}

}  // namespace orsum::openreview
