#pragma once

#include <map>
#include <string>
#include <string_view>

#include "orsum/error.hpp"

namespace orsum {

class TemplateError : public Error {
public:
  using Error::Error;
};

using Slots = std::map<std::string, std::string, std::less<>>;

// Replaces every `{name}` whose name is a known slot. A known slot that is
// referenced but missing from `slots` is an error; text in braces that is
// not a slot name (e.g. JSON) passes through unchanged.
std::string render(std::string_view tmpl, const Slots& slots);

// True if `name` is one of the slot names templates may reference.
bool is_slot_name(std::string_view name) noexcept;

// A named set of templates with shipped defaults. `load_overrides` replaces
// entries with `<dir>/<name>.txt` where such files exist.
class TemplateSet {
public:
  explicit TemplateSet(std::map<std::string, std::string, std::less<>> defaults);

  const std::string& get(std::string_view name) const;
  void set(std::string name, std::string text);
  void load_overrides(const std::string& dir);

  const std::map<std::string, std::string, std::less<>>& all() const noexcept { return items_; }

private:
  std::map<std::string, std::string, std::less<>> items_;
};

}  // namespace orsum
