#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geezmt/corpus.hpp"

namespace geezmt {

// Canonical duplicate-detection form: simple-lowercased, with every Unicode
// punctuation and whitespace code point removed.
std::string normalize_key(std::string_view text);

struct SplitRatios {
  double train = 0.7;
  double test = 0.2;
  double validation = 0.1;

  // Throws std::invalid_argument unless each is in [0,1] and they sum to 1.
  void validate() const;
};

// kStrict: a train pair collides with an evaluation pair when any of its
// keys equals any of the other's keys. kSourceOnly: only source keys count.
enum class OverlapMode { kStrict, kSourceOnly };

OverlapMode parse_overlap_mode(std::string_view text);
std::string_view to_string(OverlapMode mode);

struct DedupResult {
  Corpus corpus;
  std::size_t removed = 0;
};

// Keeps the first pair of each (source key, target key) combination.
DedupResult dedup_pairs(const Corpus& corpus);

struct DomainCounts {
  std::size_t original = 0;
  std::size_t after_dedup = 0;
  std::size_t pruned = 0;
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t validation = 0;

  std::size_t kept() const noexcept { return train + test + validation; }
};

struct SplitReport {
  std::map<std::string, DomainCounts> domains;
  std::size_t duplicates_removed = 0;
  std::size_t eval_reassigned = 0;  // validation pairs moved to test
  std::size_t pruned = 0;           // train pairs dropped for overlap
  std::size_t rebalanced = 0;       // eval pairs moved back to train
  std::vector<std::string> warnings;

  DomainCounts total() const;
};

struct SplitOptions {
  SplitRatios ratios;
  std::uint64_t seed = 20230101;
  OverlapMode mode = OverlapMode::kStrict;
  // Rebalancing kicks in when the global train fraction falls below
  // ratios.train - rebalance_tolerance.
  double rebalance_tolerance = 0.005;
};

struct SplitBundle {
  Corpus train;
  Corpus test;
  Corpus validation;
  SplitReport report;
  SplitRatios ratios;
  OverlapMode mode = OverlapMode::kStrict;

  const Direction& direction() const noexcept { return train.direction(); }
};

SplitBundle split_stratified(const Corpus& corpus, const SplitOptions& options);

enum class Rule {
  kTrainDuplicate,   // (i)
  kTrainEvalOverlap, // (ii)
  kEvalConflict,     // eval sets not pair-deduplicated or overlapping each other
  kRatio,            // (iii)/(iv)
};

std::string_view to_string(Rule rule);

struct Violation {
  Rule rule;
  std::vector<std::string> origins;
  std::string key;
  std::string detail;
};

// Ratio checks apply only to slices (whole bundle or one domain) with at
// least this many pairs; below it rounding dominates.
inline constexpr std::size_t kRatioCheckMinPairs = 1000;
inline constexpr double kRatioTolerance = 0.02;

std::vector<Violation> verify_bundle(const SplitBundle& bundle);

}  // namespace geezmt
