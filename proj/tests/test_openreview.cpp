#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "orsum/corpus.hpp"
#include "orsum/openreview.hpp"
#include "test_util.hpp"

using namespace orsum;
using namespace orsum::openreview;
using nlohmann::json;

namespace {

class NotesServer {
public:
  explicit NotesServer(int status = 200) : status_(status) {
    pages_[0] = orsum::testing::slurp(orsum::testing::fixture("openreview_page0.json"));
    pages_[2] = orsum::testing::slurp(orsum::testing::fixture("openreview_page1.json"));
    server_.Get("/notes", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      venue_ = req.get_param_value("content.venueid");
      auth_ = req.get_header_value("Authorization");
      if (status_ != 200) {
        res.status = status_;
        return;
      }
      const int offset = std::stoi(req.get_param_value("offset"));
      auto it = pages_.find(offset);
      if (it == pages_.end() || req.get_param_value("limit") != "2") {
        res.status = 400;
        return;
      }
      res.set_content(it->second, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~NotesServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::atomic<int> hits_{0};
  std::string venue_;
  std::string auth_;

private:
  int status_;
  std::map<int, std::string> pages_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

FetchSpec spec_for(const NotesServer& s) {
  FetchSpec spec;
  spec.venue_id = "FixtureConf/2023";
  spec.endpoint = s.endpoint();
  spec.page_size = 2;
  spec.token_env = "ORSUM_TEST_OR_TOKEN";
  spec.timeout_seconds = 5;
  return spec;
}

}  // namespace

TEST(OpenReview, FetchPagesAndConvert) {
  NotesServer server;
  const auto dir = orsum::testing::temp_dir("or-fetch");
  ::unsetenv("ORSUM_TEST_OR_TOKEN");
  const auto result = fetch_openreview(spec_for(server), dir.string());
  EXPECT_EQ(result.note_count, 4u);
  EXPECT_EQ(result.page_files, (std::vector<std::string>{"page-0000.json", "page-0001.json"}));
  EXPECT_EQ(server.hits_, 2);
  EXPECT_EQ(server.venue_, "FixtureConf/2023");
  EXPECT_TRUE(server.auth_.empty());
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));

  const auto conv = archive_to_records(dir.string());
  ASSERT_EQ(conv.records.size(), 3u);
  ASSERT_EQ(conv.skipped.size(), 1u);
  EXPECT_EQ(conv.skipped[0].note_id, "noteD");
  EXPECT_EQ(conv.skipped[0].file, "page-0001.json");

  const auto parsed = parse_corpus(records_to_text(conv.records), "openreview");
  ASSERT_TRUE(parsed.errors.empty());
  const auto& c = parsed.corpus;
  ASSERT_EQ(c.size(), 3u);
  const auto* a = c.find("noteA");
  const auto* b = c.find("noteB");
  const auto* cc = c.find("noteC");
  ASSERT_TRUE(a && b && cc);
  EXPECT_TRUE(a->metareview.has_value());
  EXPECT_FALSE(b->metareview.has_value());
  EXPECT_EQ(cc->decision.kind, DecisionKind::Reject);
  EXPECT_EQ(cc->url, "https://openreview.net/forum?id=noteC");
  bool saw_unofficial = false;
  for (const auto& r : cc->reviews) {
    if (!r.is_official) saw_unofficial = true;
    else EXPECT_TRUE(r.reviewer_id == "Reviewer_1" || r.reviewer_id == "Reviewer_2") << r.reviewer_id;
  }
  EXPECT_TRUE(saw_unofficial);
  EXPECT_EQ(cc->reviews[0].ratings.at("rating"), 6.0);
}

TEST(OpenReview, BearerTokenFromEnvironment) {
  NotesServer server;
  ::setenv("ORSUM_TEST_OR_TOKEN", "tok", 1);
  fetch_openreview(spec_for(server), orsum::testing::temp_dir("or-auth").string());
  ::unsetenv("ORSUM_TEST_OR_TOKEN");
  EXPECT_EQ(server.auth_, "Bearer tok");
}

TEST(OpenReview, AuthAndNetworkErrors) {
  NotesServer denied(403);
  EXPECT_THROW(fetch_openreview(spec_for(denied), orsum::testing::temp_dir("or-403").string()), AuthRequired);
  NotesServer broken(500);
  EXPECT_THROW(fetch_openreview(spec_for(broken), orsum::testing::temp_dir("or-500").string()), NetworkError);

  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  FetchSpec spec;
  spec.venue_id = "X";
  spec.endpoint = "http://127.0.0.1:" + std::to_string(port);
  spec.timeout_seconds = 2;
  EXPECT_THROW(fetch_openreview(spec, orsum::testing::temp_dir("or-refused").string()), NetworkError);
}

TEST(OpenReview, NoteShapes) {
  // v1 field shape: plain strings instead of {value: ...}.
  const json note = json::parse(R"js({
    "id": "v1note", "content": {"title": "Old style", "abstract": "abs"},
    "details": {"replies": [
      {"invitation": "Conf/-/Paper1/Official_Review", "signatures": ["Conf/Paper1/AnonReviewer2"],
       "content": {"summary_of_the_paper": "Summary text.", "strengths": "Good.", "rating": "8: accept"}},
      {"invitation": "Conf/-/Paper1/Meta_Review", "signatures": ["Conf/Paper1/Area_Chair"],
       "content": {"metareview": "Accept it."}},
      {"invitation": "Conf/-/Paper1/Decision", "content": {"decision": "Accept (Oral)"}}
    ]}})js");
  const auto r = note_to_record(note, "Conf");
  EXPECT_EQ(r["title"], "Old style");
  EXPECT_EQ(r["metareview"], "Accept it.");
  EXPECT_EQ(r["decision"], "Accept (Oral)");
  ASSERT_EQ(r["reviews"].size(), 1u);
  EXPECT_EQ(r["reviews"][0]["reviewer"], "AnonReviewer2");
  EXPECT_NE(r["reviews"][0]["text"].get<std::string>().find("Good."), std::string::npos);

  EXPECT_THROW(note_to_record(json::parse(R"({"id": "x", "content": {}})"), "Conf"), Error);
  EXPECT_THROW(note_to_record(json::parse(R"({"content": {"title": "t"}})"), "Conf"), Error);
}
