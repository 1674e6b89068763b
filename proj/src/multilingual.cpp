#include "geezmt/multilingual.hpp"

#include <algorithm>
#include <set>

#include "geezmt/error.hpp"

namespace geezmt {

std::optional<TargetTag> TargetTag::parse(std::string_view text) {
  if (text.size() < 4 || !text.starts_with("<2") || !text.ends_with(">")) return std::nullopt;
  const auto code = text.substr(2, text.size() - 3);
  if (!LanguageTag::is_valid(code)) return std::nullopt;
  TargetTag tag;
  tag.text_ = std::string(text);
  return tag;
}

SentencePair tag_source(const SentencePair& pair) {
  const TargetTag tag(pair.direction.target());
  SentencePair out = pair;
  const std::string prefix = tag.str() + " ";
  if (!pair.source_text.starts_with(prefix)) out.source_text = prefix + pair.source_text;
  return out;
}

StrippedSource strip_tag(std::string_view text) {
  const auto space = text.find(' ');
  if (space != std::string_view::npos) {
    if (auto tag = TargetTag::parse(text.substr(0, space))) {
      return StrippedSource{std::move(tag), std::string(text.substr(space + 1))};
    }
  }
  return StrippedSource{std::nullopt, std::string(text)};
}

namespace {

std::vector<SentencePair> slice(const std::vector<SentencePair>& pairs, const Direction& d) {
  std::vector<SentencePair> out;
  for (const auto& p : pairs) {
    if (p.direction == d) out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<SentencePair> MultilingualBundle::test_for(const Direction& d) const { return slice(test, d); }
std::vector<SentencePair> MultilingualBundle::train_for(const Direction& d) const { return slice(train, d); }
std::vector<SentencePair> MultilingualBundle::validation_for(const Direction& d) const {
  return slice(validation, d);
}

MultilingualBundle assemble_multilingual(const std::vector<SplitBundle>& bundles) {
  std::vector<const SplitBundle*> ordered;
  std::set<Direction> seen;
  for (const auto& b : bundles) {
    if (!seen.insert(b.direction()).second) {
      throw ConfigError("direction " + b.direction().str() + " supplied more than once");
    }
    ordered.push_back(&b);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const SplitBundle* x, const SplitBundle* y) { return x->direction() < y->direction(); });

  MultilingualBundle out;
  for (const SplitBundle* b : ordered) {
    out.directions.push_back(b->direction());
    for (const auto& p : b->train) out.train.push_back(tag_source(p));
    for (const auto& p : b->test) out.test.push_back(tag_source(p));
    for (const auto& p : b->validation) out.validation.push_back(tag_source(p));
  }
  return out;
}

}  // namespace geezmt
