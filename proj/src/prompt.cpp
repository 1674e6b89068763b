#include "geezmt/prompt.hpp"

#include <map>
#include <stdexcept>

#include "geezmt/retrieval.hpp"

namespace geezmt {

std::string language_display_name(const LanguageTag& lang) {
  static const std::map<std::string, std::string, std::less<>> kNames = {
      {"en", "English"}, {"gez", "Ge'ez"}, {"amh", "Amharic"}, {"tir", "Tigrinya"}};
  const auto it = kNames.find(lang.code());
  return it == kNames.end() ? lang.code() : it->second;
}

std::string build_prompt(const PromptSpec& spec) {
  if (spec.examples.size() > kMaxMatches) {
    throw std::invalid_argument("at most " + std::to_string(kMaxMatches) + " examples fit a prompt");
  }
  auto check = [](const std::string& text) {
    if (text.find_first_of("\r\n") != std::string::npos) {
      throw std::invalid_argument("prompt text must be a single line");
    }
    return text;
  };
  const std::string src = language_display_name(spec.source_lang);
  const std::string tgt = language_display_name(spec.target_lang);
  std::string out;
  for (auto it = spec.examples.rbegin(); it != spec.examples.rend(); ++it) {
    out += src + ": " + check(it->source) + "\n";
    out += tgt + ": " + check(it->target) + "\n";
  }
  out += src + ": " + check(spec.query_source) + "\n";
  out += tgt + ":";
  return out;
}

}  // namespace geezmt
