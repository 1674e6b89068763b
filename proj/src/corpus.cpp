#include "geezmt/corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "geezmt/error.hpp"
#include "geezmt/unicode.hpp"

namespace geezmt {

LanguageTag::LanguageTag(std::string code) : code_(std::move(code)) {
  if (!is_valid(code_)) {
    throw std::invalid_argument("invalid language code '" + code_ +
                                "': expected lowercase ASCII letters and digits");
  }
}

bool LanguageTag::is_valid(std::string_view code) noexcept {
  if (code.empty()) return false;
  for (char c : code) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))) return false;
  }
  return true;
}

Direction::Direction(LanguageTag source, LanguageTag target)
    : source_(std::move(source)), target_(std::move(target)) {
  if (source_ == target_) {
    throw std::invalid_argument("direction source and target are both '" + source_.code() + "'");
  }
}

Direction Direction::parse(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos || text.find('-', dash + 1) != std::string_view::npos) {
    throw std::invalid_argument("invalid direction '" + std::string(text) +
                                "': expected <src>-<tgt>");
  }
  return Direction(LanguageTag(std::string(text.substr(0, dash))),
                   LanguageTag(std::string(text.substr(dash + 1))));
}

void SentencePair::validate() const {
  for (const std::string* side : {&source_text, &target_text}) {
    if (side->find('\n') != std::string::npos || side->find('\r') != std::string::npos) {
      throw std::invalid_argument("sentence contains a line break (" + origin + ")");
    }
    if (unicode::trim(*side).empty()) {
      throw std::invalid_argument("sentence is blank (" + origin + ")");
    }
  }
}

Corpus::Corpus(Direction direction, std::vector<SentencePair> pairs)
    : direction_(std::move(direction)), pairs_(std::move(pairs)) {
  for (const auto& p : pairs_) {
    if (p.direction != direction_) {
      throw std::invalid_argument("pair " + p.origin + " has direction " + p.direction.str() +
                                  ", corpus is " + direction_.str());
    }
    p.validate();
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(path.string(), "read failed");
  return std::move(buffer).str();
}

std::vector<std::string> split_lines(std::string_view contents) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < contents.size()) {
    const auto nl = contents.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(contents.substr(start));
      break;
    }
    lines.emplace_back(contents.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string(), ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::string buffer;
  for (const auto& line : lines) {
    buffer += line;
    buffer += '\n';
  }
  write_file(path, buffer);
}

namespace {

std::vector<std::string> read_text_lines(const std::filesystem::path& path) {
  std::string contents = read_file(path);
  if (const auto bad = unicode::find_invalid_utf8(contents); bad != std::string::npos) {
    throw DecodeError(path.string(), bad);
  }
  if (contents.starts_with("\xEF\xBB\xBF")) contents.erase(0, 3);
  return split_lines(contents);
}

}  // namespace

IngestResult ingest_parallel(const std::filesystem::path& source_path,
                             const std::filesystem::path& target_path,
                             const Direction& direction, const std::string& domain) {
  const auto source_lines = read_text_lines(source_path);
  const auto target_lines = read_text_lines(target_path);
  if (source_lines.size() != target_lines.size()) {
    throw AlignmentError(source_lines.size(), target_lines.size());
  }

  std::vector<SentencePair> pairs;
  pairs.reserve(source_lines.size());
  std::size_t dropped = 0;
  const std::string origin_prefix = source_path.string();
  for (std::size_t i = 0; i < source_lines.size(); ++i) {
    std::string src = unicode::trim(unicode::nfc(source_lines[i]));
    std::string tgt = unicode::trim(unicode::nfc(target_lines[i]));
    if (src.empty() || tgt.empty()) {
      ++dropped;
      continue;
    }
    pairs.push_back(SentencePair{std::move(src), std::move(tgt), direction, domain,
                                 origin_prefix + ":" + std::to_string(i + 1)});
  }
  return IngestResult{Corpus(direction, std::move(pairs)), dropped};
}

void write_parallel(const Corpus& corpus, const std::filesystem::path& source_path,
                    const std::filesystem::path& target_path) {
  std::string src;
  std::string tgt;
  for (const auto& p : corpus) {
    src += p.source_text;
    src += '\n';
    tgt += p.target_text;
    tgt += '\n';
  }
  write_file(source_path, src);
  write_file(target_path, tgt);
}

}  // namespace geezmt
