#include "orsum/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "orsum/baselines.hpp"
#include "orsum/cgi2.hpp"
#include "orsum/config.hpp"
#include "orsum/corpus.hpp"
#include "orsum/generation.hpp"
#include "orsum/judge.hpp"
#include "orsum/llm/http_backend.hpp"
#include "orsum/llm/mock_backend.hpp"
#include "orsum/openreview.hpp"
#include "orsum/textmetrics.hpp"

namespace orsum::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_stem(const std::string& paper_id) {
  std::string s = paper_id;
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) c = '_';
  if (s.empty() || s == "." || s == "..") s = "_" + s;
  return s;
}

namespace {

// Input problems that map to exit status 2.
class UsageError : public Error {
public:
  using Error::Error;
};

struct Context {
  fs::path workdir;
  RunConfig cfg;
  const Hooks* hooks = nullptr;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : workdir / path;
  }
  fs::path out_dir() const { return resolve(cfg.get("out")); }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << body;
}

json with_version(json body, const Context& ctx) {
  body["version"] = kToolVersion;
  body["config_snapshot"] = ctx.cfg.snapshot();
  return body;
}

// Runs job(i) for i in [0, n) on at most `workers` threads.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F job) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

Corpus load_corpus_checked(const Context& ctx) {
  const auto path = ctx.resolve(ctx.cfg.get("corpus"));
  if (!fs::exists(path)) throw UsageError("corpus file not found: " + path.string());
  auto parsed = load_corpus(path.string());
  for (const auto& e : parsed.errors) *ctx.err << "warning: " << e.what() << "\n";
  return std::move(parsed.corpus);
}

std::vector<const PaperRecord*> selected_records(const Context& ctx, const Corpus& corpus) {
  const auto& which = ctx.cfg.get("split");
  std::vector<const PaperRecord*> out;
  if (which == "all") {
    for (const auto& r : corpus.records()) out.push_back(&r);
    return out;
  }
  auto s = parse_split(which);
  if (!s) throw UsageError("unknown split: " + which);
  return corpus.in_split(*s);
}

// ---------------------------------------------------------------------------
// Backends

class BackendProvider {
public:
  BackendProvider(const Context& ctx, std::string script_key, std::string model_key)
      : ctx_(ctx), script_key_(std::move(script_key)), model_key_(std::move(model_key)) {
    const auto& kind = ctx.cfg.get("backend");
    if (kind == "live") {
      llm::HttpBackendConfig hc;
      hc.endpoint = ctx.cfg.get("backend.endpoint");
      hc.api_key_env = ctx.cfg.get("backend.api_key_env");
      hc.max_in_flight = static_cast<std::size_t>(std::max(1L, ctx.cfg.get_int("backend.max_in_flight")));
      live_ = std::make_shared<llm::HttpBackend>(hc);
    } else if (kind == "mock") {
      const auto& script = ctx.cfg.get(script_key_);
      if (script.empty()) throw UsageError("mock backend needs `" + script_key_ + "`");
      script_path_ = ctx.resolve(script);
      if (!fs::exists(script_path_)) throw UsageError("mock script not found: " + script_path_.string());
      gate_ = ctx.hooks && ctx.hooks->gate
                  ? ctx.hooks->gate
                  : std::make_shared<llm::ConcurrencyGate>(
                        static_cast<std::size_t>(std::max(1L, ctx.cfg.get_int("backend.max_in_flight"))));
    } else {
      throw UsageError("backend must be mock or live, got: " + kind);
    }
  }

  // A live backend is shared; mock scripts are replayed per paper from the
  // first entry. A script directory holds <paper>.json or default.json.
  SessionFactory factory(const std::string& paper_id) const {
    SessionFactory f;
    if (live_) {
      f.backend = live_;
    } else {
      fs::path p = script_path_;
      if (fs::is_directory(p)) {
        p = script_path_ / (file_stem(paper_id) + ".json");
        if (!fs::exists(p)) p = script_path_ / "default.json";
      }
      f.backend = std::make_shared<llm::MockBackend>(llm::load_script(p.string()), gate_);
    }
    f.budget.per_review_token_cap = static_cast<std::size_t>(ctx_.cfg.get_int("truncation.cap"));
    f.budget.max_exchanges = static_cast<std::size_t>(ctx_.cfg.get_int("max_exchanges"));
    f.budget.request_timeout = std::chrono::milliseconds(ctx_.cfg.get_int("backend.timeout_ms"));
    f.retry.max_attempts = static_cast<int>(ctx_.cfg.get_int("retry.max_attempts"));
    f.retry.base_delay = std::chrono::milliseconds(ctx_.cfg.get_int("retry.base_delay_ms"));
    if (ctx_.hooks && ctx_.hooks->sleep) f.retry.sleep = ctx_.hooks->sleep;
    f.request.model = ctx_.cfg.get(model_key_);
    f.request.temperature = ctx_.cfg.get_double("backend.temperature");
    return f;
  }

private:
  const Context& ctx_;
  std::string script_key_;
  std::string model_key_;
  fs::path script_path_;
  std::shared_ptr<llm::ChatBackend> live_;
  std::shared_ptr<llm::ConcurrencyGate> gate_;
};

template <class T>
void apply_template_dir(const Context& ctx, T& templates, const std::string& module) {
  const auto& dir = ctx.cfg.get("templates.dir");
  if (dir.empty()) return;
  const auto sub = ctx.resolve(dir) / module;
  if (fs::is_directory(sub)) templates.load_overrides(sub.string());
}

// ---------------------------------------------------------------------------
// ingest

SplitRatios ratios_from(const RunConfig& cfg) {
  const auto parts = cfg.get_list("split.ratios");
  if (parts.size() != 3) throw UsageError("split.ratios needs three weights");
  SplitRatios w{};
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    try {
      w[i] = std::stod(parts[i]);
    } catch (const std::exception&) {
      throw UsageError("split.ratios entry is not a number: " + parts[i]);
    }
    if (w[i] < 0.0) throw UsageError("split.ratios weights must be non-negative");
    sum += w[i];
  }
  if (sum <= 0.0) throw UsageError("split.ratios weights sum to zero");
  for (auto& x : w) x /= sum;
  return w;
}

int cmd_ingest(Context& ctx, const std::string& input, const std::string& fetch_venue,
               const std::string& archive, const std::string& output) {
  std::string text;
  json source;
  std::vector<openreview::SchemaDrift> drift;
  if (!fetch_venue.empty() || !archive.empty()) {
    fs::path dir;
    if (!fetch_venue.empty()) {
      openreview::FetchSpec spec;
      spec.venue_id = fetch_venue;
      spec.endpoint = ctx.cfg.get("fetch.endpoint");
      spec.page_size = static_cast<std::size_t>(ctx.cfg.get_int("fetch.page_size"));
      spec.max_concurrent_pages = static_cast<std::size_t>(ctx.cfg.get_int("fetch.max_concurrent_pages"));
      spec.token_env = ctx.cfg.get("fetch.token_env");
      dir = ctx.out_dir() / "archive" / file_stem(fetch_venue);
      auto fetched = openreview::fetch_openreview(spec, dir.string());
      source = {{"fetch", fetch_venue}, {"archive", dir.string()}, {"notes", fetched.note_count}};
    } else {
      dir = ctx.resolve(archive);
      source = {{"archive", dir.string()}};
    }
    auto conv = openreview::archive_to_records(dir.string());
    for (const auto& d : conv.skipped) *ctx.err << "schema drift: " << d.file << " " << d.note_id << ": " << d.reason << "\n";
    drift = std::move(conv.skipped);
    text = openreview::records_to_text(conv.records);
  } else if (!input.empty()) {
    text = read_file(ctx.resolve(input));
    source = {{"input", input}};
  } else {
    throw UsageError("ingest needs --input, --fetch or --archive");
  }

  const auto ratios = ratios_from(ctx.cfg);
  auto parsed = parse_corpus(std::string_view(text), input.empty() ? fetch_venue : input);
  const auto read = parsed.corpus.size() + parsed.errors.size();
  auto filtered = filter_records_reported(parsed.corpus);
  const auto seed = static_cast<std::uint64_t>(ctx.cfg.get_int("seed"));
  auto split = assign_splits(filtered.corpus, seed, ratios);

  const auto out_path = ctx.resolve(output.empty() ? ctx.cfg.get("corpus") : output);
  fs::create_directories(out_path.parent_path());
  write_corpus(split, out_path.string());

  json malformed = json::array();
  for (const auto& e : parsed.errors) malformed.push_back({{"line", e.line()}, {"cause", e.cause()}});
  json dropped = json::array();
  for (const auto& d : filtered.dropped) dropped.push_back({{"id", d.id}, {"reason", d.reason}});
  json drift_j = json::array();
  for (const auto& d : drift) drift_j.push_back({{"note_id", d.note_id}, {"file", d.file}, {"reason", d.reason}});
  const auto sizes = split.split_sizes();
  json report = {{"source", source},
                 {"corpus", out_path.lexically_relative(ctx.workdir).string()},
                 {"records_read", read},
                 {"malformed", malformed},
                 {"schema_drift", drift_j},
                 {"dropped", dropped},
                 {"unofficial_reviews_removed", filtered.unofficial_reviews_removed},
                 {"records_written", split.size()},
                 {"split_sizes", {{"train", sizes[0]}, {"validation", sizes[1]}, {"test", sizes[2]}}}};
  write_file(ctx.out_dir() / "ingest_report.json", with_version(report, ctx).dump(2) + "\n");
  *ctx.out << "ingested " << split.size() << " of " << read << " records (" << filtered.dropped.size()
           << " dropped, " << parsed.errors.size() << " malformed)\n";
  if (parsed.corpus.empty()) {
    *ctx.err << "error: no valid records in input\n";
    return kExitUsage;
  }
  return split.empty() ? kExitTotalFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// stats

int cmd_stats(Context& ctx) {
  const auto corpus = load_corpus_checked(ctx);
  std::vector<PaperRecord> recs;
  for (const auto* r : selected_records(ctx, corpus)) recs.push_back(*r);
  if (recs.empty()) throw UsageError("no records selected");
  const Corpus sel(std::move(recs), corpus.provenance());
  const auto s = textmetrics::corpus_stats(sel);
  json body = {{"records", sel.size()},
               {"count_src", s.count_src},
               {"count_trg", s.count_trg},
               {"mean_len_src", s.mean_len_src},
               {"mean_len_trg", s.mean_len_trg},
               {"novel_ngram_ratio", s.novel_ngram_ratio},
               {"nid", s.nid}};
  write_file(ctx.out_dir() / "stats.json", with_version(body, ctx).dump(2) + "\n");
  *ctx.out << body.dump() << "\n";
  std::ostringstream t;
  t << std::fixed << std::setprecision(2) << "Count(SRC)  Count(TRG)  Len(SRC)  Len(TRG)  Novel 4-gram    NID\n"
    << std::setw(10) << s.count_src << "  " << std::setw(10) << s.count_trg << "  " << std::setw(8)
    << s.mean_len_src << "  " << std::setw(8) << s.mean_len_trg << "  " << std::setw(11)
    << 100.0 * s.novel_ngram_ratio << "%  " << std::setprecision(4) << s.nid << "\n";
  *ctx.out << t.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// generate

fs::path trace_dir(const Context& ctx, Method m) { return ctx.out_dir() / "traces" / std::string(to_string(m)); }

int cmd_generate(Context& ctx) {
  const auto method = parse_method(ctx.cfg.get("method"));
  if (!method) throw UsageError("unknown method: " + ctx.cfg.get("method"));
  const auto corpus = load_corpus_checked(ctx);
  const auto papers = selected_records(ctx, corpus);
  if (papers.empty()) throw UsageError("no records selected for generation");

  std::unique_ptr<BackendProvider> provider;
  if (*method != Method::LexRank) provider = std::make_unique<BackendProvider>(ctx, "mock.script", "backend.model");

  cgi2::Cgi2Options cgi_opts;
  cgi_opts.iterations = static_cast<int>(ctx.cfg.get_int("iterations"));
  if (cgi_opts.iterations < 0) throw UsageError("iterations must be >= 0");
  if (const auto& p = ctx.cfg.get("checklist"); !p.empty()) {
    try {
      cgi_opts.checklist = cgi2::load_checklist(ctx.resolve(p).string());
    } catch (const cgi2::InvalidChecklist& e) {
      throw UsageError(e.what());
    }
  }
  apply_template_dir(ctx, cgi_opts.templates, "cgi2");
  auto base_templates = baselines::default_templates();
  apply_template_dir(ctx, base_templates, "baselines");

  std::optional<baselines::Exemplar> exemplar;
  if (*method == Method::ICL) {
    try {
      exemplar = baselines::load_exemplar(
          ctx.cfg.get("exemplar").empty() ? std::string() : ctx.resolve(ctx.cfg.get("exemplar")).string());
    } catch (const baselines::MissingExemplar& e) {
      throw UsageError(e.what());
    }
  }
  baselines::LexRankOptions lex;
  lex.threshold = ctx.cfg.get_double("lexrank.threshold");
  lex.damping = ctx.cfg.get_double("lexrank.damping");
  lex.budget = static_cast<std::size_t>(ctx.cfg.get_int("lexrank.budget"));
  lex.tol = ctx.cfg.get_double("lexrank.tol");
  const int n_sent = static_cast<int>(ctx.cfg.get_int("three_sent.n"));

  const auto dir = trace_dir(ctx, *method);
  fs::create_directories(dir);
  const auto snapshot = ctx.cfg.snapshot();
  std::vector<GenerationTrace> traces(papers.size());

  parallel_for(papers.size(), static_cast<std::size_t>(ctx.cfg.get_int("parallelism")), [&](std::size_t i) {
    const PaperRecord& paper = *papers[i];
    GenerationTrace t;
    try {
      switch (*method) {
        case Method::CGI2:
          t = cgi2::run_cgi2(paper, cgi_opts, provider->factory(paper.id));
          break;
        case Method::Vanilla:
          t = baselines::vanilla(paper, provider->factory(paper.id), base_templates);
          break;
        case Method::ThreeSent:
          t = baselines::three_sent(paper, provider->factory(paper.id), n_sent, base_templates);
          break;
        case Method::ICL:
          t = baselines::icl(paper, exemplar, provider->factory(paper.id), base_templates);
          break;
        case Method::LexRank:
          t = baselines::lexrank(paper, lex);
          break;
      }
    } catch (const std::exception& e) {
      t.paper_id = paper.id;
      t.method = *method;
      t.status = {false, error_kind(e), e.what(), "setup"};
    }
    json snap = snapshot;
    snap["method_params"] = t.config_snapshot;
    t.config_snapshot = std::move(snap);
    const auto stem = file_stem(paper.id);
    write_file(dir / (stem + ".transcript.jsonl"), llm::transcript_jsonl(t.exchanges));
    write_file(dir / (stem + ".trace.json"), trace_to_json(t, stem + ".transcript.jsonl").dump(2) + "\n");
    traces[i] = std::move(t);
  });

  std::size_t ok = 0, exchanges = 0;
  json failures = json::array(), ids = json::array(), per_paper = json::object();
  for (const auto& t : traces) {
    ids.push_back(t.paper_id);
    per_paper[t.paper_id] = t.exchanges.size();
    exchanges += t.exchanges.size();
    if (t.status.ok) {
      ++ok;
    } else {
      failures.push_back({{"paper_id", t.paper_id},
                          {"error_kind", t.status.error_kind},
                          {"message", t.status.message},
                          {"failed_step", t.status.failed_step}});
      *ctx.err << "failed: " << t.paper_id << " (" << t.status.error_kind << " at " << t.status.failed_step
               << "): " << t.status.message << "\n";
    }
  }
  json summary = {{"method", to_string(*method)},
                  {"papers", ids},
                  {"succeeded", ok},
                  {"failed", traces.size() - ok},
                  {"failures", failures},
                  {"exchange_total", exchanges},
                  {"exchanges", per_paper}};
  write_file(dir / "summary.json", with_version(summary, ctx).dump(2) + "\n");
  *ctx.out << to_string(*method) << ": " << ok << " succeeded, " << traces.size() - ok << " failed, "
           << exchanges << " exchanges\n";
  return ok == 0 ? kExitTotalFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct PaperEval {
  judge::RecordScores scores;
  std::vector<json> lines;
  std::vector<llm::Exchange> exchanges;
  std::vector<std::string> errors;
};

int cmd_evaluate(Context& ctx, const std::vector<std::string>& methods_arg) {
  const auto families = ctx.cfg.get_list("metrics");
  if (families.empty()) throw UsageError("no metrics requested");
  std::vector<judge::Protocol> protocols;
  bool rouge = false, composition = false;
  for (const auto& f : families) {
    if (f == "rouge-l" || f == "rouge_l") {
      rouge = true;
    } else if (f == "composition") {
      composition = true;
    } else if (auto p = judge::parse_protocol(f)) {
      protocols.push_back(*p);
    } else {
      throw UsageError("unknown metric: " + f);
    }
  }
  auto columns = judge::metric_columns(families);

  const auto corpus = load_corpus_checked(ctx);
  std::set<std::string> known;
  for (const auto& r : corpus.records()) known.insert(r.id);

  judge::ExternalScores external;
  if (const auto& p = ctx.cfg.get("external"); !p.empty()) {
    try {
      external = judge::import_external_scores(ctx.resolve(p).string(), known);
    } catch (const judge::SchemaError& e) {
      throw UsageError(e.what());
    } catch (const judge::UnknownPaperId& e) {
      throw UsageError(e.what());
    }
    for (const auto& m : external.metrics())
      if (std::find(columns.begin(), columns.end(), m) == columns.end()) columns.push_back(m);
  }

  std::vector<std::string> methods = methods_arg;
  if (methods.empty()) {
    const auto root = ctx.out_dir() / "traces";
    if (fs::is_directory(root))
      for (const auto& e : fs::directory_iterator(root))
        if (fs::exists(e.path() / "summary.json")) methods.push_back(e.path().filename().string());
    std::sort(methods.begin(), methods.end());
  }
  if (methods.empty()) throw UsageError("no traces found; run generate first");

  std::unique_ptr<BackendProvider> provider;
  if (!protocols.empty() || composition)
    provider = std::make_unique<BackendProvider>(ctx, "judge.mock.script", "judge.model");
  auto templates = judge::default_templates();
  apply_template_dir(ctx, templates, "judge");
  const auto batch = static_cast<std::size_t>(ctx.cfg.get_int("judge.composition_batch"));

  judge::EvalReport report;
  report.columns = columns;
  report.config_snapshot = ctx.cfg.snapshot();
  report.unnormalized = external.unnormalized;

  for (const auto& method_name : methods) {
    const auto method = parse_method(method_name);
    if (!method) throw UsageError("unknown method: " + method_name);
    const auto dir = trace_dir(ctx, *method);
    const auto summary_path = dir / "summary.json";
    if (!fs::exists(summary_path)) throw UsageError("no summary for method " + method_name + "; run generate first");
    const auto summary = json::parse(read_file(summary_path));
    const auto ids = summary.at("papers").get<std::vector<std::string>>();
    std::vector<PaperEval> results(ids.size());

    parallel_for(ids.size(), static_cast<std::size_t>(ctx.cfg.get_int("parallelism")), [&](std::size_t i) {
      PaperEval& pe = results[i];
      const auto& id = ids[i];
      pe.scores.paper_id = id;
      const PaperRecord* paper = corpus.find(id);
      const auto trace_path = dir / (file_stem(id) + ".trace.json");
      if (!paper || !fs::exists(trace_path)) {
        pe.errors.push_back(!paper ? "paper not in corpus" : "trace missing");
        return;
      }
      std::string draft;
      try {
        const auto t = trace_from_json(json::parse(read_file(trace_path)));
        if (!t.status.ok || !t.final_draft()) {
          pe.errors.push_back("generation failed: " + t.status.error_kind);
          return;
        }
        draft = *t.final_draft();
      } catch (const std::exception& e) {
        pe.errors.push_back(std::string("unreadable trace: ") + e.what());
        return;
      }
      auto add = [&](const std::string& metric, double raw, double normalized, double reported) {
        pe.scores.metrics[metric] = reported;
        pe.lines.push_back(judge::score_line(id, method_name, metric, raw, normalized));
      };
      if (rouge && paper->metareview) {
        try {
          const double f1 =
              textmetrics::rouge_l(textmetrics::tokenize(draft), textmetrics::tokenize(*paper->metareview)).f1;
          add("rouge_l", f1, f1, f1);
        } catch (const textmetrics::EmptyInput& e) {
          pe.errors.push_back(std::string("rouge_l: ") + e.what());
        }
      }
      std::optional<SessionFactory> judge_sessions;
      if (provider) {
        try {
          judge_sessions = provider->factory(id);
        } catch (const std::exception& e) {
          pe.errors.push_back(std::string("judge backend: ") + e.what());
        }
      }
      if (judge_sessions) {
        const auto& factory = *judge_sessions;
        const auto input = judge::judge_input(*paper, draft);
        for (auto p : protocols) {
          for (auto a : judge::kAspects) {
            const std::string metric = std::string(judge::to_string(p)) + "." + std::string(judge::to_string(a));
            try {
              auto s = judge::judge_aspect(input, a, p, factory, templates);
              add(metric, s.raw, s.normalized, s.normalized);
              pe.exchanges.insert(pe.exchanges.end(), s.exchanges.begin(), s.exchanges.end());
            } catch (const std::exception& e) {
              pe.errors.push_back(metric + ": " + e.what());
            }
          }
        }
        if (composition) {
          try {
            auto c = judge::composition_score(id, draft, factory, batch, templates);
            add("composition.pros_cons", c.pros_cons, c.pros_cons / 2.0, c.pros_cons);
            add("composition.consensus_controversy", c.consensus_controversy, c.consensus_controversy / 2.0,
                c.consensus_controversy);
            pe.exchanges.insert(pe.exchanges.end(), c.exchanges.begin(), c.exchanges.end());
          } catch (const std::exception& e) {
            pe.errors.push_back(std::string("composition: ") + e.what());
          }
        }
      }
      for (const auto& m : external.metrics())
        if (auto v = external.lookup(m, method_name, id)) add(m, *v, *v, *v);
    });

    std::string lines;
    std::vector<judge::RecordScores> records;
    for (auto& pe : results) {
      for (const auto& l : pe.lines) lines += l.dump() + "\n";
      for (const auto& e : pe.errors) *ctx.err << method_name << " " << pe.scores.paper_id << ": " << e << "\n";
      if (!pe.exchanges.empty())
        write_file(ctx.out_dir() / "judge" / method_name / (file_stem(pe.scores.paper_id) + ".transcript.jsonl"),
                   llm::transcript_jsonl(pe.exchanges));
      records.push_back(std::move(pe.scores));
    }
    write_file(ctx.out_dir() / "scores" / (method_name + ".scores.jsonl"), lines);
    try {
      report.rows.push_back(judge::aggregate(method_name, records, columns));
    } catch (const judge::EmptyScoreSet& e) {
      *ctx.err << "error: " << e.what() << "\n";
    }
  }

  write_file(ctx.out_dir() / "eval.json", judge::to_json(report).dump(2) + "\n");
  const auto table = judge::render_table(report);
  write_file(ctx.out_dir() / "report.txt", table);
  *ctx.out << table;
  return report.rows.empty() ? kExitTotalFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(Context& ctx) {
  const auto path = ctx.out_dir() / "eval.json";
  if (!fs::exists(path)) throw UsageError("no evaluation found at " + path.string() + "; run evaluate first");
  const auto j = json::parse(read_file(path));
  const auto report = judge::report_from_json(j);
  const auto table = judge::render_table(report);
  write_file(ctx.out_dir() / "report.txt", table);
  *ctx.out << table;
  return report.rows.empty() ? kExitTotalFailure : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Hooks& hooks) {
  CLI::App app{"Meta-review generation and evaluation toolchain", "orsum"};
  app.require_subcommand(1);
  std::string workdir = ".";
  std::string config;
  std::vector<std::string> sets;
  app.add_option("--workdir", workdir, "Base directory for every relative path");
  app.add_option("--config", config, "Flat key = value configuration file");
  app.add_option("--set", sets, "Override a config key (key=value); repeatable");
  app.set_version_flag("--version", std::string(kToolVersion));

  auto* ingest = app.add_subcommand("ingest", "Parse, filter and split a raw corpus");
  std::string input, fetch, archive, output;
  ingest->add_option("--input", input, "Raw line-delimited records");
  ingest->add_option("--fetch", fetch, "OpenReview venue id to fetch");
  ingest->add_option("--archive", archive, "Previously fetched OpenReview archive directory");
  ingest->add_option("--output", output, "Corpus file to write (default: config `corpus`)");

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  std::string corpus_opt, split_opt;
  stats->add_option("--corpus", corpus_opt, "Corpus file");
  stats->add_option("--split", split_opt, "all, train, validation or test");

  auto* generate = app.add_subcommand("generate", "Generate meta-reviews");
  std::string method, iterations, checklist, exemplar, gen_split;
  generate->add_option("--method", method, "cgi2, vanilla, 3sent, icl or lexrank");
  generate->add_option("--iterations", iterations, "Checklist passes for cgi2");
  generate->add_option("--checklist", checklist, "Checklist file, one question per line");
  generate->add_option("--exemplar", exemplar, "ICL exemplar JSON");
  generate->add_option("--split", gen_split, "all, train, validation or test");

  auto* evaluate = app.add_subcommand("evaluate", "Score generated meta-reviews");
  std::string metrics, external;
  std::vector<std::string> eval_methods;
  evaluate->add_option("--metrics", metrics, "Comma list of rouge-l, geval, likert, composition");
  evaluate->add_option("--external", external, "Line-delimited external scores to merge");
  evaluate->add_option("--method", eval_methods, "Methods to evaluate (default: every generated one)");

  auto* report = app.add_subcommand("report", "Render the evaluation table");

  std::vector<std::string> argv_s = {"orsum"};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_s) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Context ctx;
  ctx.workdir = fs::path(workdir);
  ctx.hooks = &hooks;
  ctx.out = &out;
  ctx.err = &err;
  try {
    if (!fs::is_directory(ctx.workdir)) throw UsageError("workdir does not exist: " + workdir);
    if (!config.empty()) ctx.cfg.merge_file(ctx.resolve(config).string());
    for (const auto& s : sets) ctx.cfg.set(std::string_view(s));
    auto flag = [&](const std::string& key, const std::string& v) {
      if (!v.empty()) ctx.cfg.set(key, v);
    };
    flag("corpus", corpus_opt);
    flag("split", split_opt.empty() ? gen_split : split_opt);
    flag("method", method);
    flag("iterations", iterations);
    flag("checklist", checklist);
    flag("exemplar", exemplar);
    flag("metrics", metrics);
    flag("external", external);

    if (*ingest) return cmd_ingest(ctx, input, fetch, archive, output);
    if (*stats) return cmd_stats(ctx);
    if (*generate) return cmd_generate(ctx);
    if (*evaluate) return cmd_evaluate(ctx, eval_methods);
    if (*report) return cmd_report(ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EmptyInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidRatios& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const openreview::AuthRequired& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitTotalFailure;
  }
  return kExitUsage;
}

}  // namespace orsum::cli
