// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cgi2_script.hpp"
#include "orsum/cgi2.hpp"
#include "orsum/cli.hpp"
#include "orsum/corpus.hpp"
#include "orsum/judge.hpp"
#include "orsum/lexrank.hpp"
#include "orsum/llm/mock_backend.hpp"
#include "orsum/textmetrics.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace orsum;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and limits.
constexpr int kRougePairs = 1000;
constexpr std::size_t kRougeMaxLen = 12;
constexpr double kRougeSeconds = 5.0;
constexpr double kEntropyTol = 1e-6;
constexpr double kUniformNidTol = 1e-12;
constexpr int kLexGraphs = 200;
constexpr Eigen::Index kLexMaxSentences = 8;
constexpr double kLexL1Tol = 1e-6;
constexpr double kLexSumTol = 1e-9;
constexpr double kCgiSeconds = 10.0;
constexpr int kCompositionTrials = 2000;
constexpr double kReleaseLenRel = 0.02;
constexpr double kReleaseNovelPoints = 1.0;
constexpr double kReleaseNidAbs = 0.02;
constexpr double kE2eSeconds = 30.0;

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------

std::size_t exhaustive_lcs(const textmetrics::TokenSeq& a, const textmetrics::TokenSeq& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto len = static_cast<std::size_t>(__builtin_popcount(mask));
    if (len <= best) continue;
    std::size_t j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else ++j;
    }
    if (ok) best = len;
  }
  return best;
}

textmetrics::TokenSeq random_tokens(std::mt19937_64& rng, std::size_t max_len, int alphabet) {
  textmetrics::TokenSeq s;
  const auto n = 1 + rng() % max_len;
  for (std::size_t i = 0; i < n; ++i) s.tokens.push_back(std::string(1, static_cast<char>('a' + rng() % alphabet)));
  return s;
}

Outcome rouge_oracle() {
  Outcome o;
  std::mt19937_64 rng(20231);
  const auto start = Clock::now();
  for (int t = 0; t < kRougePairs; ++t) {
    const auto a = random_tokens(rng, kRougeMaxLen, 4);
    const auto b = random_tokens(rng, kRougeMaxLen, 4);
    const auto l = static_cast<double>(exhaustive_lcs(a, b));
    const double p = l / static_cast<double>(a.size());
    const double r = l / static_cast<double>(b.size());
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    if (textmetrics::rouge_l(a, b).f1 != f) o.fail("pair " + std::to_string(t) + " differs");
  }
  const double secs = seconds_since(start);
  if (secs >= kRougeSeconds) o.fail("took " + fmt(secs) + " s");
  if (o.pass) o.detail = std::to_string(kRougePairs) + " pairs exact in " + fmt(secs) + " s";
  return o;
}

Outcome entropy_nid() {
  using textmetrics::make_tokens;
  Outcome o;
  const double h = textmetrics::entropy(make_tokens({"a", "a", "a", "b"}));
  const double n = textmetrics::nid(make_tokens({"a", "a", "a", "b"}));
  if (std::abs(h - 0.562335) > kEntropyTol) o.fail("entropy " + fmt(h));
  // Closed form for [a,a,a,b]: 1 - H(1/4, 3/4) in bits = 0.18872188 (the
  // four-digit ratio 0.562335 / 0.693147 gives the same to 1e-7).
  const double nid_oracle = 1.0 + (0.75 * std::log2(0.75) + 0.25 * std::log2(0.25));
  if (std::abs(nid_oracle - 0.1887219) > kEntropyTol) o.fail("nid oracle " + fmt(nid_oracle));
  if (std::abs(n - nid_oracle) > kEntropyTol) o.fail("nid " + fmt(n));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    textmetrics::TokenSeq s;
    const auto len = 2 + rng() % 40;
    for (std::size_t i = 0; i < len; ++i) s.tokens.push_back("w" + std::to_string(i));
    const double v = textmetrics::nid(s);
    if (std::abs(v) > kUniformNidTol) o.fail("all-distinct nid " + fmt(v));
  }
  if (o.pass) o.detail = "entropy " + fmt(h) + ", nid " + fmt(n);
  return o;
}

Outcome lexrank_oracle() {
  Outcome o;
  std::mt19937_64 rng(31337);
  double worst = 0.0;
  for (int t = 0; t < kLexGraphs; ++t) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % kLexMaxSentences);
    Eigen::MatrixXd features = Eigen::MatrixXd::Zero(n, 6);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < 6; ++k) features(i, k) = rng() % 3 == 0 ? 1.0 + static_cast<double>(rng() % 3) : 0.0;
    const auto sim = lexrank::cosine_similarity(features);
    const double threshold = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    const auto c = lexrank::centrality(sim, threshold, 0.85, 1e-12);

    Eigen::EigenSolver<Eigen::MatrixXd> es(lexrank::transition_matrix(sim, threshold, 0.85).transpose());
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    v /= v.sum();
    const double l1 = (c.scores - v).lpNorm<1>();
    worst = std::max(worst, l1);
    if (l1 > kLexL1Tol) o.fail("graph " + std::to_string(t) + " L1 " + fmt(l1));
    if (std::abs(c.scores.sum() - 1.0) > kLexSumTol) o.fail("graph " + std::to_string(t) + " sum " + fmt(c.scores.sum()));
  }
  if (o.pass) o.detail = std::to_string(kLexGraphs) + " graphs, worst L1 " + fmt(worst);
  return o;
}

Outcome cgi2_structure() {
  Outcome o;
  const auto start = Clock::now();
  const auto& checklist = cgi2::default_checklist();
  int runs = 0;
  for (std::size_t reviewers : {1u, 3u, 5u}) {
    for (int iterations : {0, 1, 2}) {
      const auto paper = testing::synthetic_paper("acc-r" + std::to_string(reviewers) + "-i" + std::to_string(iterations), reviewers);
      const auto script = llm::parse_script(testing::cgi2_script(paper, checklist, iterations));
      cgi2::Cgi2Options opts;
      opts.iterations = iterations;
      auto once = [&] {
        SessionFactory f;
        f.backend = std::make_shared<llm::MockBackend>(script);
        return cgi2::run_cgi2(paper, opts, f);
      };
      const auto a = once();
      const auto b = once();
      ++runs;
      const std::string tag = "R=" + std::to_string(reviewers) + " it=" + std::to_string(iterations) + ": ";
      if (!a.status.ok) {
        o.fail(tag + a.status.message);
        continue;
      }
      const std::size_t k = checklist.size();
      if (a.exchanges.size() != reviewers + 3 + 2 * k * static_cast<std::size_t>(iterations))
        o.fail(tag + "exchanges " + std::to_string(a.exchanges.size()));
      if (a.drafts.size() != 1 + k * static_cast<std::size_t>(iterations))
        o.fail(tag + "drafts " + std::to_string(a.drafts.size()));
      for (int it = 0; it < iterations; ++it)
        for (std::size_t q = 0; q < k; ++q) {
          const auto& ex = a.exchanges[reviewers + 3 + 2 * (static_cast<std::size_t>(it) * k + q)];
          if (ex.request_messages.back().content != checklist[q].for_decision("acceptance"))
            o.fail(tag + "question order at " + std::to_string(q + 1));
        }
      for (std::size_t i = reviewers + 3; i < a.exchanges.size(); ++i)
        for (const auto& m : a.exchanges[i].request_messages)
          if (m.tag == llm::MessageTag::RawReview) o.fail(tag + "raw review after pruning");
      const auto ja = trace_to_json(a, "t.jsonl").dump() + llm::transcript_jsonl(a.exchanges);
      const auto jb = trace_to_json(b, "t.jsonl").dump() + llm::transcript_jsonl(b.exchanges);
      if (ja != jb) o.fail(tag + "traces differ between runs");
    }
  }
  const double secs = seconds_since(start);
  if (secs >= kCgiSeconds) o.fail("took " + fmt(secs) + " s");
  if (o.pass) o.detail = std::to_string(runs) + " configurations in " + fmt(secs) + " s";
  return o;
}

SessionFactory scripted(const std::vector<std::string>& replies) {
  json s = json::array();
  for (const auto& r : replies) s.push_back({{"reply", r}});
  SessionFactory f;
  f.backend = std::make_shared<llm::MockBackend>(llm::parse_script(s));
  return f;
}

Outcome judge_fixture() {
  Outcome o;
  const auto cases = testing::load_json(testing::fixture("judge_replies.json"));
  const judge::JudgeInput input{"acc", {"R1: Sound method.", "R2: Thin evaluation."},
                                "The reviewers find the method sound but the evaluation thin.", "acceptance"};
  std::size_t matched = 0;
  for (const auto& c : cases) {
    const std::string name = c["name"];
    std::vector<std::string> replies = {c["reply"].get<std::string>()};
    if (c.contains("reask_reply")) replies.push_back(c["reask_reply"]);
    const auto protocol = *judge::parse_protocol(c.value("protocol", "geval"));
    std::string got;
    try {
      const auto s = judge::judge_aspect(input, judge::Aspect::DiscussionInvolvement, protocol, scripted(replies));
      got = std::to_string(s.raw);
      const double q = s.normalized * 4.0;
      if (q != std::round(q) || s.normalized < 0.0 || s.normalized > 1.0) o.fail(name + ": off-grid " + fmt(s.normalized));
    } catch (const judge::UnparseableScore&) {
      got = "unparseable";
    } catch (const judge::OutOfRange&) {
      got = "out_of_range";
    } catch (const std::exception& e) {
      got = std::string("error: ") + e.what();
    }
    const auto& exp = c["expected"];
    const std::string want = exp.is_number() ? std::to_string(exp.get<int>()) : exp.get<std::string>();
    if (got == want) ++matched;
    else o.fail(name + ": got " + got + ", want " + want);
  }
  const double grid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int raw = 1; raw <= 5; ++raw)
    if (judge::normalize_likert(raw) != grid[raw - 1]) o.fail("normalize " + std::to_string(raw));
  if (cases.size() != 20) o.fail("fixture has " + std::to_string(cases.size()) + " cases");
  if (o.pass) o.detail = std::to_string(matched) + "/" + std::to_string(cases.size()) + " replies, quarter grid";
  return o;
}

Outcome composition_rule() {
  Outcome o;
  std::mt19937_64 rng(8);
  for (int t = 0; t < kCompositionTrials; ++t) {
    std::vector<judge::SentenceScore> ss;
    int mp = 0, mc = 0;
    const auto n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = static_cast<int>(rng() % 3), b = static_cast<int>(rng() % 3);
      mp = std::max(mp, a);
      mc = std::max(mc, b);
      ss.push_back({"s" + std::to_string(i), a, b});
    }
    const auto c = judge::composition_from_sentences("p", ss);
    if (c.pros_cons != mp || c.consensus_controversy != mc) o.fail("trial " + std::to_string(t));
  }
  const std::string sentence =
      "The three reviewers agreed that the contribution is relevant to the workshop and presents a solid work.";
  const auto c = judge::composition_score("example", sentence, scripted({"1/1"}));
  if (c.pros_cons != 1 || c.consensus_controversy != 1)
    o.fail("example scored (" + std::to_string(c.pros_cons) + "," + std::to_string(c.consensus_controversy) + ")");
  if (o.pass) o.detail = std::to_string(kCompositionTrials) + " random lists, example (1,1)";
  return o;
}

void check_stats(Outcome& o, const std::string& label, const textmetrics::CorpusStats& s, const json& m) {
  if (s.count_src != m["count_src"].get<std::size_t>()) o.fail(label + " count_src");
  if (s.count_trg != m["count_trg"].get<std::size_t>()) o.fail(label + " count_trg");
  if (s.mean_len_src != m["mean_len_src"].get<double>()) o.fail(label + " mean_len_src " + fmt(s.mean_len_src));
  if (s.mean_len_trg != m["mean_len_trg"].get<double>()) o.fail(label + " mean_len_trg " + fmt(s.mean_len_trg));
  // Ratios are compared up to summation-order rounding.
  if (std::abs(s.novel_ngram_ratio - m["novel_ngram_ratio"].get<double>()) > 1e-12) o.fail(label + " novel");
  if (std::abs(s.nid - m["nid"].get<double>()) > 1e-12) o.fail(label + " nid");
}

Outcome table1_stats() {
  Outcome o;
  const auto m = testing::load_json(testing::fixture("corpus50.manifest.json"));
  const auto parsed = load_corpus(testing::fixture("corpus50.raw.jsonl"));
  if (!parsed.errors.empty()) o.fail("fixture has malformed records");
  check_stats(o, "raw", textmetrics::corpus_stats(parsed.corpus), m["stats_raw"]);
  check_stats(o, "filtered", textmetrics::corpus_stats(filter_records(parsed.corpus)), m["stats_filtered"]);
  std::string note = "fixture manifest matched";

  if (const char* release = std::getenv("ORSUM_RELEASE"); release && *release) {
    const auto rel = load_corpus(release);
    const auto s = textmetrics::corpus_stats(rel.corpus);
    if (s.count_src != 40903) o.fail("release Count(SRC) " + std::to_string(s.count_src));
    if (s.count_trg != 10989) o.fail("release Count(TRG) " + std::to_string(s.count_trg));
    if (std::abs(s.mean_len_src / 376.36 - 1.0) > kReleaseLenRel) o.fail("release Len(SRC) " + fmt(s.mean_len_src));
    if (std::abs(s.mean_len_trg / 141.76 - 1.0) > kReleaseLenRel) o.fail("release Len(TRG) " + fmt(s.mean_len_trg));
    if (std::abs(100.0 * s.novel_ngram_ratio - 99.89) > kReleaseNovelPoints)
      o.fail("release novel 4-gram " + fmt(100.0 * s.novel_ngram_ratio));
    if (std::abs(s.nid - 0.1572) > kReleaseNidAbs) o.fail("release NID " + fmt(s.nid));
    note += "; release checked";
  } else {
    note += "; release not supplied (ORSUM_RELEASE unset)";
  }
  if (o.pass) o.detail = note;
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto dir = testing::temp_dir("acceptance-e2e");
  fs::copy_file(testing::fixture("e2e.raw.jsonl"), dir / "raw.jsonl");
  fs::copy_file(testing::fixture("e2e_cgi2_script.json"), dir / "cgi2.json");
  fs::copy_file(testing::fixture("e2e_judge_script.json"), dir / "judge.json");
  const std::vector<std::string> base = {"--workdir",       dir.string(),
                                         "--set",           "mock.script=cgi2.json",
                                         "--set",           "judge.mock.script=judge.json"};
  auto step = [&](std::vector<std::string> args) {
    std::vector<std::string> full = base;
    full.insert(full.end(), args.begin(), args.end());
    std::ostringstream out, err;
    const int code = cli::run(full, out, err);
    if (code != 0) o.fail(args[0] + " exited " + std::to_string(code) + ": " + err.str());
    return out.str();
  };
  const auto start = Clock::now();
  step({"ingest", "--input", "raw.jsonl"});
  step({"generate", "--method", "cgi2"});
  step({"evaluate", "--metrics", "rouge-l,geval,likert,composition"});
  const auto table = step({"report"});
  const double secs = seconds_since(start);
  if (!o.pass) return o;
  if (secs >= kE2eSeconds) o.fail("took " + fmt(secs) + " s");

  const auto eval = testing::load_json((dir / "out" / "eval.json").string());
  const auto columns = judge::metric_columns({"rouge-l", "geval", "likert", "composition"});
  if (eval["columns"].get<std::vector<std::string>>() != columns) o.fail("unexpected columns");
  if (eval["rows"].size() != 1) o.fail("expected one method row");
  else {
    const auto& row = eval["rows"][0];
    if (row["count"].get<std::size_t>() != 5) o.fail("row covers " + row["count"].dump() + " papers");
    if (!row["incomplete"].empty()) o.fail("incomplete records present");
    for (const auto& c : columns)
      if (!row["means"].contains(c) || !row["means"][c].is_number()) o.fail("column " + c + " empty");
  }
  if (!eval["config_snapshot"].is_object() || eval["config_snapshot"].empty()) o.fail("no config snapshot");
  if (table != testing::slurp((dir / "out" / "report.txt").string())) o.fail("report output differs from report.txt");
  if (o.pass) o.detail = "pipeline in " + fmt(secs) + " s, " + std::to_string(columns.size()) + " columns populated";
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 ROUGE-L oracle equivalence", rouge_oracle},
      {"2 entropy/NID hand cases", entropy_nid},
      {"3 LexRank oracle equivalence", lexrank_oracle},
      {"4 CGI2 structural contract", cgi2_structure},
      {"5 judge parsing fixture suite", judge_fixture},
      {"6 composition max-rule", composition_rule},
      {"7 corpus statistics", table1_stats},
      {"8 end-to-end smoke", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << ")" << std::endl;
  }
  return failed;
}
