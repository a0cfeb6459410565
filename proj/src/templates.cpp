#include "orsum/templates.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace orsum {

namespace {

constexpr std::array<std::string_view, 22> kSlotNames = {
    "title",    "abstract", "review_text", "reviewer", "opinions",  "bundle",
    "decision", "draft",    "question",    "feedback", "reviews",   "metareview",
    "aspect",   "criteria", "steps",       "sentences", "n",        "exemplar_reviews",
    "exemplar_metareview", "error", "count", "instruction"};

}  // namespace

bool is_slot_name(std::string_view name) noexcept {
  for (auto s : kSlotNames)
    if (s == name) return true;
  return false;
}

std::string render(std::string_view tmpl, const Slots& slots) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if (c == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = tmpl.substr(i + 1, close - i - 1);
        if (is_slot_name(name)) {
          auto it = slots.find(name);
          if (it == slots.end()) throw TemplateError("template slot {" + std::string(name) + "} has no value");
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += c;
    ++i;
  }
  return out;
}

TemplateSet::TemplateSet(std::map<std::string, std::string, std::less<>> defaults)
    : items_(std::move(defaults)) {}

const std::string& TemplateSet::get(std::string_view name) const {
  auto it = items_.find(name);
  if (it == items_.end()) throw TemplateError("unknown template: " + std::string(name));
  return it->second;
}

void TemplateSet::set(std::string name, std::string text) {
  if (!items_.contains(name)) throw TemplateError("unknown template: " + name);
  items_[std::move(name)] = std::move(text);
}

void TemplateSet::load_overrides(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw TemplateError("template directory not found: " + dir);
  for (auto& [name, text] : items_) {
    const fs::path p = fs::path(dir) / (name + ".txt");
    if (!fs::exists(p)) continue;
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  }
}

}  // namespace orsum
