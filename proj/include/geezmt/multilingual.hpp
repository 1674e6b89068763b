#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geezmt/dedup_split.hpp"

namespace geezmt {

// "<2" + code + ">", e.g. <2gez>.
class TargetTag {
public:
  explicit TargetTag(const LanguageTag& lang) : text_("<2" + lang.code() + ">") {}

  const std::string& str() const noexcept { return text_; }
  LanguageTag language() const { return LanguageTag(text_.substr(2, text_.size() - 3)); }

  // Accepts exactly "<2" + valid language code + ">".
  static std::optional<TargetTag> parse(std::string_view text);

  bool operator==(const TargetTag&) const = default;

private:
  TargetTag() = default;
  std::string text_;
};

SentencePair tag_source(const SentencePair& pair);

struct StrippedSource {
  std::optional<TargetTag> tag;
  std::string text;
};

StrippedSource strip_tag(std::string_view text);

// Tagged pairs of several directions. Each pair keeps its own direction so
// per-direction slices can be recovered.
struct MultilingualBundle {
  std::vector<Direction> directions;  // sorted
  std::vector<SentencePair> train;
  std::vector<SentencePair> test;
  std::vector<SentencePair> validation;

  std::vector<SentencePair> test_for(const Direction& direction) const;
  std::vector<SentencePair> train_for(const Direction& direction) const;
  std::vector<SentencePair> validation_for(const Direction& direction) const;
};

// Tags and concatenates; ordered by direction, then original order. Throws
// ConfigError when a direction appears twice.
MultilingualBundle assemble_multilingual(const std::vector<SplitBundle>& bundles);

}  // namespace geezmt
