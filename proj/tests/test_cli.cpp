#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "orsum/cli.hpp"
#include "orsum/config.hpp"
#include "orsum/generation.hpp"
#include "orsum/llm/backend.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace orsum;
using nlohmann::json;
using orsum::testing::fixture;
using orsum::testing::load_json;
using orsum::testing::slurp;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(const fs::path& workdir, std::vector<std::string> args, const cli::Hooks& hooks = {}) {
  std::vector<std::string> full = {"--workdir", workdir.string()};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(full, out, err, hooks);
  r.out = out.str();
  r.err = err.str();
  return r;
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// Workdir with the end-to-end fixture corpus, scripts and a config file.
fs::path e2e_workdir(const std::string& tag) {
  const auto dir = orsum::testing::temp_dir(tag);
  fs::copy_file(fixture("e2e.raw.jsonl"), dir / "raw.jsonl");
  fs::copy_file(fixture("e2e_cgi2_script.json"), dir / "cgi2.json");
  fs::copy_file(fixture("e2e_judge_script.json"), dir / "judge.json");
  write(dir / "orsum.conf",
        "# fixture run\n"
        "mock.script = cgi2.json\n"
        "judge.mock.script = judge.json\n"
        "retry.base_delay_ms = 1\n");
  return dir;
}

Result ingest(const fs::path& dir) { return run(dir, {"--config", "orsum.conf", "ingest", "--input", "raw.jsonl"}); }

}  // namespace

TEST(Config, DefaultsMergeAndOverrides) {
  RunConfig cfg;
  EXPECT_EQ(cfg.get("backend"), "mock");
  EXPECT_EQ(cfg.get_int("iterations"), 2);
  cfg.merge_text("# comment\niterations = 3\n\nmethod=vanilla\n", "test");
  EXPECT_EQ(cfg.get_int("iterations"), 3);
  EXPECT_EQ(cfg.get("method"), "vanilla");
  cfg.set("lexrank.damping=0.5");
  EXPECT_EQ(cfg.get_double("lexrank.damping"), 0.5);
  EXPECT_EQ(cfg.get_list("judge.protocols"), (std::vector<std::string>{"geval", "likert"}));
  EXPECT_EQ(cfg.snapshot()["iterations"], "3");
  EXPECT_THROW(cfg.set("no.such.key=1"), ConfigError);
  EXPECT_THROW(cfg.merge_text("garbage line\n", "test"), ConfigError);
  EXPECT_THROW(cfg.get_int("method"), ConfigError);
  EXPECT_THROW(cfg.merge_file("/nonexistent/orsum.conf"), ConfigError);
}

TEST(Cli, FileStem) {
  EXPECT_EQ(cli::file_stem("abc-1.x_Y"), "abc-1.x_Y");
  EXPECT_EQ(cli::file_stem("a/b c"), "a_b_c");
}

TEST(Cli, UsageErrors) {
  const auto dir = orsum::testing::temp_dir("cli-usage");
  EXPECT_EQ(run(dir, {}).code, cli::kExitUsage);
  EXPECT_EQ(run(dir, {"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run(dir, {"--set", "bogus=1", "stats"}).code, cli::kExitUsage);
  EXPECT_EQ(run(dir, {"stats"}).code, cli::kExitUsage);  // no corpus yet
  EXPECT_EQ(run(dir, {"report"}).code, cli::kExitUsage);
  const auto v = run(dir, {"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("orsum"), std::string::npos);
}

TEST(Ingest, Corpus50CountsAndDeterminism) {
  const auto dir = orsum::testing::temp_dir("cli-ingest");
  fs::copy_file(fixture("corpus50.raw.jsonl"), dir / "raw.jsonl");
  const auto m = load_json(fixture("corpus50.manifest.json"));

  auto r = run(dir, {"ingest", "--input", "raw.jsonl"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = load_json((dir / "out" / "ingest_report.json").string());
  EXPECT_EQ(report["records_read"], m["record_count"]);
  EXPECT_EQ(report["records_written"], m["survivor_ids"].size());
  EXPECT_EQ(report["dropped"].size(), m["dropped"].size());
  EXPECT_EQ(report["unofficial_reviews_removed"], m["unofficial_reviews_removed"]);
  const auto& sizes = report["split_sizes"];
  EXPECT_EQ(json::array({sizes["train"], sizes["validation"], sizes["test"]}), m["split_sizes_orsum_ratios"]);
  EXPECT_TRUE(report.contains("version"));
  EXPECT_TRUE(report["config_snapshot"].is_object());

  const auto first = slurp((dir / "corpus.jsonl").string());
  ASSERT_EQ(run(dir, {"ingest", "--input", "raw.jsonl"}).code, 0);
  EXPECT_EQ(slurp((dir / "corpus.jsonl").string()), first);

  auto s = run(dir, {"stats"});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto stats = load_json((dir / "out" / "stats.json").string());
  const auto& exp = m["stats_filtered"];
  EXPECT_EQ(stats["count_src"], exp["count_src"]);
  EXPECT_EQ(stats["count_trg"], exp["count_trg"]);
  EXPECT_NEAR(stats["nid"].get<double>(), exp["nid"].get<double>(), 1e-12);
  EXPECT_NE(s.out.find("Count(SRC)"), std::string::npos);
}

TEST(Ingest, EmptyAndAllMalformedInputs) {
  const auto dir = orsum::testing::temp_dir("cli-empty");
  write(dir / "empty.jsonl", "");
  EXPECT_EQ(run(dir, {"ingest", "--input", "empty.jsonl"}).code, cli::kExitUsage);
  write(dir / "bad.jsonl", "{not json}\n[1,2]\n");
  EXPECT_EQ(run(dir, {"ingest", "--input", "bad.jsonl"}).code, cli::kExitUsage);
  EXPECT_EQ(run(dir, {"ingest", "--input", "missing.jsonl"}).code, cli::kExitUsage);
  EXPECT_EQ(run(dir, {"ingest"}).code, cli::kExitUsage);
}

TEST(Generate, Cgi2TracesAndDeterminism) {
  const auto dir = e2e_workdir("cli-gen");
  ASSERT_EQ(ingest(dir).code, 0);
  auto g = run(dir, {"--config", "orsum.conf", "generate", "--method", "cgi2"});
  ASSERT_EQ(g.code, 0) << g.err;
  const auto traces = dir / "out" / "traces" / "cgi2";
  const auto golden = load_json(fixture("e2e_golden.json"));
  const auto summary = load_json((traces / "summary.json").string());
  EXPECT_EQ(summary["succeeded"], 5);
  EXPECT_EQ(summary["failed"], 0);
  EXPECT_EQ(summary["papers"], golden["ids"]);
  for (const auto& id : golden["ids"]) {
    const auto t = load_json((traces / (id.get<std::string>() + ".trace.json")).string());
    EXPECT_EQ(t["exchange_count"], golden["exchanges_per_paper"]);
    EXPECT_EQ(t["drafts"], golden["drafts"]);
    EXPECT_TRUE(t["config_snapshot"].contains("method_params"));
    EXPECT_EQ(t["config_snapshot"]["mock.script"], "cgi2.json");
    EXPECT_EQ(t["version"], std::string(kToolVersion));
  }
  auto bytes = [&] {
    std::string all;
    for (const auto& id : golden["ids"])
      all += slurp((traces / (id.get<std::string>() + ".trace.json")).string()) +
             slurp((traces / (id.get<std::string>() + ".transcript.jsonl")).string());
    return all;
  };
  const auto before = bytes();
  ASSERT_EQ(run(dir, {"--config", "orsum.conf", "generate", "--method", "cgi2"}).code, 0);
  EXPECT_EQ(bytes(), before);
}

TEST(Generate, IterationsFlagControlsExchanges) {
  const auto dir = e2e_workdir("cli-iter");
  ASSERT_EQ(ingest(dir).code, 0);
  ASSERT_EQ(run(dir, {"--config", "orsum.conf", "generate", "--iterations", "1"}).code, 0);
  const auto summary = load_json((dir / "out" / "traces" / "cgi2" / "summary.json").string());
  EXPECT_EQ(summary["exchanges"]["e2e0"], 3 + 3 + 8);
}

TEST(Generate, LexRankNeedsNoBackend) {
  const auto dir = e2e_workdir("cli-lex");
  ASSERT_EQ(ingest(dir).code, 0);
  auto g = run(dir, {"--set", "mock.script=", "generate", "--method", "lexrank"});
  ASSERT_EQ(g.code, 0) << g.err;
  const auto summary = load_json((dir / "out" / "traces" / "lexrank" / "summary.json").string());
  EXPECT_EQ(summary["exchange_total"], 0);
  EXPECT_EQ(summary["succeeded"], 5);
}

TEST(Generate, PartialAndTotalFailure) {
  const auto dir = e2e_workdir("cli-fail");
  ASSERT_EQ(ingest(dir).code, 0);
  // e2e2 gets a script that runs dry after six replies.
  fs::create_directories(dir / "scripts");
  fs::copy_file(dir / "cgi2.json", dir / "scripts" / "default.json");
  auto short_script = load_json((dir / "cgi2.json").string());
  short_script.erase(short_script.begin() + 6, short_script.end());
  write(dir / "scripts" / "e2e2.json", short_script.dump());
  auto g = run(dir, {"--config", "orsum.conf", "--set", "mock.script=scripts", "generate"});
  EXPECT_EQ(g.code, 0) << g.err;
  const auto summary = load_json((dir / "out" / "traces" / "cgi2" / "summary.json").string());
  EXPECT_EQ(summary["succeeded"], 4);
  EXPECT_EQ(summary["failed"], 1);
  EXPECT_EQ(summary["failures"][0]["paper_id"], "e2e2");
  EXPECT_EQ(summary["failures"][0]["error_kind"], "ScriptExhausted");
  EXPECT_NE(g.err.find("e2e2"), std::string::npos);

  write(dir / "empty_script.json", "[]");
  auto all = run(dir, {"--config", "orsum.conf", "--set", "mock.script=empty_script.json", "generate"});
  EXPECT_EQ(all.code, cli::kExitTotalFailure);
}

TEST(Generate, MissingInputsAreUsageErrors) {
  const auto dir = e2e_workdir("cli-missing");
  ASSERT_EQ(ingest(dir).code, 0);
  EXPECT_EQ(run(dir, {"--config", "orsum.conf", "generate", "--method", "icl"}).code, cli::kExitUsage);
  EXPECT_EQ(run(dir, {"--config", "orsum.conf", "generate", "--method", "nope"}).code, cli::kExitUsage);
  EXPECT_EQ(run(dir, {"--set", "mock.script=absent.json", "generate"}).code, cli::kExitUsage);
  write(dir / "bad_checklist.txt", "a\n\nb\n");
  EXPECT_EQ(run(dir, {"--config", "orsum.conf", "generate", "--checklist", "bad_checklist.txt"}).code,
            cli::kExitUsage);
}

TEST(Generate, ConcurrencyStaysWithinLimit) {
  const auto dir = e2e_workdir("cli-conc");
  ASSERT_EQ(ingest(dir).code, 0);
  auto script = load_json((dir / "cgi2.json").string());
  for (auto& e : script) e["latency_ms"] = 2;
  write(dir / "slow.json", script.dump());
  cli::Hooks hooks;
  hooks.gate = std::make_shared<llm::ConcurrencyGate>(2);
  auto g = run(dir, {"--set", "mock.script=slow.json", "--set", "parallelism=5", "generate"}, hooks);
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_LE(hooks.gate->peak(), 2u);
  EXPECT_GE(hooks.gate->peak(), 1u);
}

TEST(Evaluate, MatchesGoldenReport) {
  const auto dir = e2e_workdir("cli-eval");
  ASSERT_EQ(ingest(dir).code, 0);
  ASSERT_EQ(run(dir, {"--config", "orsum.conf", "generate"}).code, 0);
  auto e = run(dir, {"--config", "orsum.conf", "evaluate"});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto golden = load_json(fixture("e2e_golden.json"));
  const auto eval = load_json((dir / "out" / "eval.json").string());
  ASSERT_EQ(eval["rows"].size(), 1u);
  const auto& row = eval["rows"][0];
  EXPECT_EQ(row["method"], "cgi2");
  EXPECT_EQ(row["count"], 5);
  EXPECT_TRUE(row["incomplete"].empty());
  for (const auto& [k, v] : golden["means"].items()) EXPECT_NEAR(row["means"][k].get<double>(), v.get<double>(), 1e-12) << k;
  EXPECT_TRUE(eval["config_snapshot"].is_object());
  EXPECT_EQ(eval["version"], std::string(kToolVersion));

  const auto golden_table = slurp(fixture("e2e_golden_report.txt"));
  EXPECT_EQ(slurp((dir / "out" / "report.txt").string()), golden_table);
  EXPECT_EQ(e.out, golden_table);

  const auto scores = slurp((dir / "out" / "scores" / "cgi2.scores.jsonl").string());
  EXPECT_NE(scores.find("\"metric\":\"composition.pros_cons\""), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "judge" / "cgi2" / "e2e0.transcript.jsonl"));

  fs::remove(dir / "out" / "report.txt");
  auto rep = run(dir, {"report"});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(rep.out, golden_table);
  EXPECT_EQ(slurp((dir / "out" / "report.txt").string()), golden_table);
}

TEST(Evaluate, RougeOnlyMakesNoJudgeCalls) {
  const auto dir = e2e_workdir("cli-rouge");
  ASSERT_EQ(ingest(dir).code, 0);
  ASSERT_EQ(run(dir, {"--config", "orsum.conf", "generate"}).code, 0);
  // An absent judge script would fail if any judge backend were created.
  auto e = run(dir, {"--config", "orsum.conf", "--set", "judge.mock.script=absent.json", "evaluate", "--metrics",
                     "rouge-l"});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto eval = load_json((dir / "out" / "eval.json").string());
  EXPECT_EQ(eval["columns"], json::array({"rouge_l"}));
  const auto golden = load_json(fixture("e2e_golden.json"));
  EXPECT_NEAR(eval["rows"][0]["means"]["rouge_l"].get<double>(), golden["means"]["rouge_l"].get<double>(), 1e-12);
  EXPECT_FALSE(fs::exists(dir / "out" / "judge"));
}

TEST(Evaluate, MissingGoldAndExternalScores) {
  const auto dir = e2e_workdir("cli-ext");
  ASSERT_EQ(ingest(dir).code, 0);
  ASSERT_EQ(run(dir, {"--set", "mock.script=cgi2.json", "generate", "--method", "lexrank"}).code, 0);
  // Remove one gold meta-review from the ingested corpus.
  std::istringstream in(slurp((dir / "corpus.jsonl").string()));
  std::string line, rewritten;
  while (std::getline(in, line)) {
    auto j = json::parse(line);
    if (j["id"] == "e2e1") j["metareview"] = nullptr;
    rewritten += j.dump() + "\n";
  }
  write(dir / "corpus.jsonl", rewritten);
  write(dir / "ext.jsonl",
        "{\"paper_id\":\"e2e0\",\"metric\":\"bertscore\",\"value\":0.5}\n"
        "{\"paper_id\":\"e2e2\",\"metric\":\"bertscore\",\"value\":0.7}\n");
  auto e = run(dir, {"evaluate", "--metrics", "rouge-l", "--external", "ext.jsonl"});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto eval = load_json((dir / "out" / "eval.json").string());
  EXPECT_EQ(eval["columns"], json::array({"rouge_l", "bertscore"}));
  const auto& row = eval["rows"][0];
  EXPECT_EQ(row["method"], "lexrank");
  EXPECT_EQ(row["count"], 2);
  EXPECT_DOUBLE_EQ(row["means"]["bertscore"].get<double>(), 0.6);
  EXPECT_EQ(row["incomplete"].size(), 3u);

  write(dir / "bad_ext.jsonl", "{\"paper_id\":\"nobody\",\"metric\":\"m\",\"value\":1}\n");
  EXPECT_EQ(run(dir, {"evaluate", "--metrics", "rouge-l", "--external", "bad_ext.jsonl"}).code, cli::kExitUsage);
}
