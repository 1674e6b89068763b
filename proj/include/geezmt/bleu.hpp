#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geezmt/multilingual.hpp"

namespace geezmt {

// NFC, split every punctuation code point off as its own token, split on
// whitespace. Case is preserved.
std::vector<std::string> eval_tokenize(std::string_view text);

struct BleuReport {
  double score = 0.0;
  std::array<double, 4> precisions{};
  double brevity_penalty = 0.0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  bool smoothed = false;

  // BLEU = 77.88 100.0/100.0/100.0/100.0 (BP = 0.779 ratio = 0.800 hyp_len = 4 ref_len = 5)
  std::string summary() const;
  // key=value lines
  std::string key_values() const;
};

struct BleuOptions {
  // Orders with zero matches use (0 + 1) / (total + 1); orders with matches
  // are left alone, so smoothing only changes otherwise-zero scores.
  bool smooth = false;
};

BleuReport bleu_corpus(const std::vector<std::string>& hypotheses,
                       const std::vector<std::string>& references,
                       const BleuOptions& options = {});

std::map<Direction, BleuReport> bleu_by_direction(
    const MultilingualBundle& bundle,
    const std::map<Direction, std::vector<std::string>>& hypotheses,
    const BleuOptions& options = {});

}  // namespace geezmt
