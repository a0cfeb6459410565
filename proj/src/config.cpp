#include "orsum/config.hpp"

#include <fstream>
#include <sstream>

namespace orsum {

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const std::map<std::string, std::string> d = {
      {"corpus", "corpus.jsonl"},
      {"out", "out"},
      {"seed", "0"},
      {"split.ratios", "9890,549,550"},
      {"split", "all"},
      {"fetch.endpoint", "https://api2.openreview.net"},
      {"fetch.page_size", "1000"},
      {"fetch.max_concurrent_pages", "2"},
      {"fetch.token_env", "OPENREVIEW_TOKEN"},
      {"backend", "mock"},
      {"backend.endpoint", "https://api.openai.com/v1/chat/completions"},
      {"backend.model", "gpt-3.5-turbo"},
      {"backend.api_key_env", "OPENAI_API_KEY"},
      {"backend.temperature", "0"},
      {"backend.max_in_flight", "4"},
      {"backend.timeout_ms", "60000"},
      {"mock.script", ""},
      {"judge.mock.script", ""},
      {"judge.model", "gpt-3.5-turbo"},
      {"judge.protocols", "geval,likert"},
      {"judge.composition_batch", "0"},
      {"method", "cgi2"},
      {"iterations", "2"},
      {"checklist", ""},
      {"exemplar", ""},
      {"three_sent.n", "3"},
      {"truncation.cap", "300"},
      {"max_exchanges", "1000"},
      {"lexrank.threshold", "0.1"},
      {"lexrank.damping", "0.85"},
      {"lexrank.budget", "6"},
      {"lexrank.tol", "1e-8"},
      {"metrics", "rouge-l,geval,likert,composition"},
      {"external", ""},
      {"parallelism", "4"},
      {"retry.max_attempts", "3"},
      {"retry.base_delay_ms", "1000"},
      {"templates.dir", ""},
  };
  return d;
}

RunConfig::RunConfig() : values_(defaults()) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void RunConfig::set(const std::string& key, std::string value) {
  if (!defaults().contains(key)) throw ConfigError("unknown config key: " + key);
  values_[key] = std::move(value);
}

void RunConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got: " + std::string(assignment));
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::merge_text(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      set(std::string_view(t));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path);
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

long RunConfig::get_int(const std::string& key) const {
  const auto& v = get(key);
  try {
    std::size_t used = 0;
    long x = std::stol(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + " must be an integer, got: " + v);
}

double RunConfig::get_double(const std::string& key) const {
  const auto& v = get(key);
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + " must be a number, got: " + v);
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + " must be true or false, got: " + v);
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ','))
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

nlohmann::json RunConfig::snapshot() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

}  // namespace orsum
