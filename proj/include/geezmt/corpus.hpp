#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace geezmt {

// Short lowercase language identifier such as "en", "gez", "amh", "tir".
class LanguageTag {
public:
  explicit LanguageTag(std::string code);

  const std::string& code() const noexcept { return code_; }

  static bool is_valid(std::string_view code) noexcept;

  friend auto operator<=>(const LanguageTag&, const LanguageTag&) = default;

private:
  std::string code_;
};

class Direction {
public:
  Direction(LanguageTag source, LanguageTag target);

  // Parses "en-gez".
  static Direction parse(std::string_view text);

  const LanguageTag& source() const noexcept { return source_; }
  const LanguageTag& target() const noexcept { return target_; }

  std::string str() const { return source_.code() + "-" + target_.code(); }

  friend auto operator<=>(const Direction&, const Direction&) = default;

private:
  LanguageTag source_;
  LanguageTag target_;
};

struct SentencePair {
  std::string source_text;
  std::string target_text;
  Direction direction;
  std::string domain;
  std::string origin;

  // Throws std::invalid_argument when either side is blank or carries a
  // newline.
  void validate() const;
};

// An ordered, direction-homogeneous collection of pairs.
class Corpus {
public:
  explicit Corpus(Direction direction) : direction_(std::move(direction)) {}
  Corpus(Direction direction, std::vector<SentencePair> pairs);

  const Direction& direction() const noexcept { return direction_; }
  const std::vector<SentencePair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const SentencePair& operator[](std::size_t i) const { return pairs_[i]; }

  auto begin() const noexcept { return pairs_.begin(); }
  auto end() const noexcept { return pairs_.end(); }

private:
  Direction direction_;
  std::vector<SentencePair> pairs_;
};

struct IngestResult {
  Corpus corpus;
  std::size_t dropped_lines = 0;
};

// Reads two line-aligned UTF-8 files. Lines are NFC-normalized and trimmed;
// a line index where either side ends up empty is dropped and counted.
IngestResult ingest_parallel(const std::filesystem::path& source_path,
                             const std::filesystem::path& target_path,
                             const Direction& direction, const std::string& domain);

void write_parallel(const Corpus& corpus, const std::filesystem::path& source_path,
                    const std::filesystem::path& target_path);

// Reads a whole file, or throws IoError.
std::string read_file(const std::filesystem::path& path);
// Splits file contents into lines, dropping a single trailing newline.
std::vector<std::string> split_lines(std::string_view contents);
void write_file(const std::filesystem::path& path, std::string_view contents);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

}  // namespace geezmt
