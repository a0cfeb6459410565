#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orsum/error.hpp"

namespace orsum {

class ConfigError : public Error {
public:
  using Error::Error;
};

// Flat `key = value` configuration. Every known key has a default, so a
// resolved config is always fully concrete; unknown keys are rejected.
class RunConfig {
public:
  RunConfig();  // all defaults

  // Parses `key = value` lines; `#` starts a comment line.
  void merge_text(std::string_view text, const std::string& source);
  void merge_file(const std::string& path);
  // "key=value"
  void set(std::string_view assignment);
  void set(const std::string& key, std::string value);

  const std::string& get(const std::string& key) const;
  long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma separated

  // Every key with its resolved value.
  nlohmann::json snapshot() const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  static const std::map<std::string, std::string>& defaults();

private:
  std::map<std::string, std::string> values_;
};

}  // namespace orsum
