#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "geezmt/corpus.hpp"

namespace geezmt {

inline constexpr std::string_view kPromptTemplateVersion = "fuzzy-v1";

struct PromptExample {
  std::string source;
  std::string target;
};

struct PromptSpec {
  // Most similar first.
  std::vector<PromptExample> examples;
  std::string query_source;
  LanguageTag source_lang;
  LanguageTag target_lang;
};

// English, Ge'ez, Amharic, Tigrinya; the code itself for anything else.
std::string language_display_name(const LanguageTag& lang);

// fuzzy-v1 layout, one field per line, examples in ascending similarity so
// the closest match sits right above the query:
//
//   <Source>: <example source>
//   <Target>: <example target>
//   ...
//   <Source>: <query>
//   <Target>:
//
// Throws std::invalid_argument if any text holds a newline or there are
// more than kMaxMatches examples.
std::string build_prompt(const PromptSpec& spec);

}  // namespace geezmt
