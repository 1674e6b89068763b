#include "geezmt/dedup_split.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "geezmt/hash.hpp"
#include "geezmt/rng.hpp"
#include "geezmt/unicode.hpp"

namespace geezmt {

std::string normalize_key(std::string_view text) {
  std::u32string out;
  for (char32_t cp : unicode::to_u32(text)) {
    if (unicode::is_punctuation(cp) || unicode::is_whitespace(cp)) continue;
    out.push_back(unicode::to_lower(cp));
  }
  return unicode::to_utf8(out);
}

void SplitRatios::validate() const {
  for (double r : {train, test, validation}) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw std::invalid_argument("split ratios must each lie in [0, 1]");
    }
  }
  if (std::abs(train + test + validation - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
}

OverlapMode parse_overlap_mode(std::string_view text) {
  if (text == "strict") return OverlapMode::kStrict;
  if (text == "source-source") return OverlapMode::kSourceOnly;
  throw std::invalid_argument("unknown overlap mode '" + std::string(text) +
                              "' (expected strict or source-source)");
}

std::string_view to_string(OverlapMode mode) {
  return mode == OverlapMode::kStrict ? "strict" : "source-source";
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::kTrainDuplicate: return "i:train-duplicate";
    case Rule::kTrainEvalOverlap: return "ii:train-eval-overlap";
    case Rule::kEvalConflict: return "eval-conflict";
    case Rule::kRatio: return "iii-iv:ratio";
  }
  return "unknown";
}

DomainCounts SplitReport::total() const {
  DomainCounts t;
  for (const auto& [_, c] : domains) {
    t.original += c.original;
    t.after_dedup += c.after_dedup;
    t.pruned += c.pruned;
    t.train += c.train;
    t.test += c.test;
    t.validation += c.validation;
  }
  return t;
}

namespace {

std::string pair_key(const std::string& src_key, const std::string& tgt_key) {
  std::string k = src_key;
  k += '\x1f';
  k += tgt_key;
  return k;
}

struct Keys {
  std::string src;
  std::string tgt;
};

std::vector<Keys> compute_keys(const std::vector<SentencePair>& pairs) {
  std::vector<Keys> keys;
  keys.reserve(pairs.size());
  for (const auto& p : pairs) keys.push_back({normalize_key(p.source_text), normalize_key(p.target_text)});
  return keys;
}

// Keys of a pair that take part in overlap checks under `mode`, without
// repeats.
std::vector<const std::string*> overlap_keys(const Keys& k, OverlapMode mode) {
  if (mode == OverlapMode::kSourceOnly || k.src == k.tgt) return {&k.src};
  return {&k.src, &k.tgt};
}

enum class Slot { kTrain, kTest, kValidation, kDropped };

std::uint64_t domain_seed(std::uint64_t seed, const std::string& domain) {
  return splitmix64(seed ^ fnv1a64(domain));
}

}  // namespace

DedupResult dedup_pairs(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  std::vector<SentencePair> kept;
  kept.reserve(corpus.size());
  for (const auto& p : corpus) {
    if (seen.insert(pair_key(normalize_key(p.source_text), normalize_key(p.target_text))).second) {
      kept.push_back(p);
    }
  }
  const std::size_t removed = corpus.size() - kept.size();
  return DedupResult{Corpus(corpus.direction(), std::move(kept)), removed};
}

SplitBundle split_stratified(const Corpus& corpus, const SplitOptions& options) {
  options.ratios.validate();
  const auto& ratios = options.ratios;
  const OverlapMode mode = options.mode;

  SplitReport report;
  for (const auto& p : corpus) ++report.domains[p.domain].original;

  DedupResult deduped = dedup_pairs(corpus);
  report.duplicates_removed = deduped.removed;
  const auto& pairs = deduped.corpus.pairs();
  const std::size_t n = pairs.size();
  const auto keys = compute_keys(pairs);

  std::map<std::string, std::vector<std::size_t>> by_domain;
  for (std::size_t i = 0; i < n; ++i) by_domain[pairs[i].domain].push_back(i);

  std::vector<Slot> slot(n, Slot::kTrain);
  // Position within the domain's shuffled order; rebalancing takes the
  // evaluation pair nearest the train boundary first.
  std::vector<std::size_t> rank(n, 0);

  for (auto& [domain, members] : by_domain) {
    report.domains[domain].after_dedup = members.size();
    if (members.size() < 3) {
      report.warnings.push_back("domain '" + domain + "' has " + std::to_string(members.size()) +
                                " pair(s); placed wholly in train");
      continue;
    }
    std::mt19937_64 gen(domain_seed(options.seed, domain));
    std::vector<std::size_t> order = members;
    deterministic_shuffle(std::span<std::size_t>(order), gen);

    const double size = static_cast<double>(order.size());
    auto n_test = static_cast<std::size_t>(std::llround(size * ratios.test));
    auto n_val = static_cast<std::size_t>(std::llround(size * ratios.validation));
    n_test = std::min(n_test, order.size());
    n_val = std::min(n_val, order.size() - n_test);
    for (std::size_t r = 0; r < order.size(); ++r) {
      const std::size_t i = order[r];
      rank[i] = r;
      slot[i] = r < n_test ? Slot::kTest : (r < n_test + n_val ? Slot::kValidation : Slot::kTrain);
    }
  }

  // Validation pairs that collide with test move into test until the two
  // sets are disjoint.
  {
    std::unordered_set<std::string> test_keys;
    for (std::size_t i = 0; i < n; ++i) {
      if (slot[i] != Slot::kTest) continue;
      for (const auto* k : overlap_keys(keys[i], mode)) test_keys.insert(*k);
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (slot[i] != Slot::kValidation) continue;
        const auto ks = overlap_keys(keys[i], mode);
        const bool hit = std::any_of(ks.begin(), ks.end(),
                                     [&](const std::string* k) { return test_keys.contains(*k); });
        if (!hit) continue;
        slot[i] = Slot::kTest;
        for (const auto* k : ks) test_keys.insert(*k);
        ++report.eval_reassigned;
        changed = true;
      }
    }
  }

  // Key multiset of the evaluation side.
  std::unordered_map<std::string, std::size_t> eval_keys;
  auto add_eval = [&](std::size_t i) {
    for (const auto* k : overlap_keys(keys[i], mode)) ++eval_keys[*k];
  };
  auto remove_eval = [&](std::size_t i) {
    for (const auto* k : overlap_keys(keys[i], mode)) {
      if (auto it = eval_keys.find(*k); it != eval_keys.end() && --it->second == 0) eval_keys.erase(it);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (slot[i] == Slot::kTest || slot[i] == Slot::kValidation) add_eval(i);
  }

  // A train key collides with any evaluation key it is compared against:
  // strict compares both train keys with both evaluation keys; source-only
  // compares sources.
  auto collides_with_eval = [&](std::size_t i) {
    if (mode == OverlapMode::kSourceOnly) return eval_keys.contains(keys[i].src);
    return eval_keys.contains(keys[i].src) || eval_keys.contains(keys[i].tgt);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (slot[i] == Slot::kTrain && collides_with_eval(i)) {
      slot[i] = Slot::kDropped;
      ++report.pruned;
      ++report.domains[pairs[i].domain].pruned;
    }
  }

  std::map<std::string, std::array<std::size_t, 3>> per_domain;  // train, test, val
  std::array<std::size_t, 3> totals{};
  for (std::size_t i = 0; i < n; ++i) {
    if (slot[i] == Slot::kDropped) continue;
    const auto s = static_cast<std::size_t>(slot[i]);
    ++per_domain[pairs[i].domain][s];
    ++totals[s];
  }

  auto movable = [&](std::size_t i) {
    for (const auto* k : overlap_keys(keys[i], mode)) {
      // Each overlap key of a pair is counted once for that pair.
      if (eval_keys.at(*k) != 1) return false;
    }
    return true;
  };

  const std::size_t kept_total = totals[0] + totals[1] + totals[2];
  auto train_fraction = [&] {
    return kept_total == 0 ? 1.0 : static_cast<double>(totals[0]) / static_cast<double>(kept_total);
  };
  while (kept_total > 0 && train_fraction() < ratios.train - options.rebalance_tolerance) {
    const double surplus_test = static_cast<double>(totals[1]) - ratios.test * kept_total;
    const double surplus_val = static_cast<double>(totals[2]) - ratios.validation * kept_total;
    std::array<Slot, 2> preference = surplus_test >= surplus_val
                                         ? std::array{Slot::kTest, Slot::kValidation}
                                         : std::array{Slot::kValidation, Slot::kTest};
    std::optional<std::size_t> chosen;
    for (Slot from : preference) {
      // Per domain, the movable pair of this split nearest the train boundary.
      std::map<std::string, std::size_t> best;
      for (std::size_t i = 0; i < n; ++i) {
        if (slot[i] != from || !movable(i)) continue;
        auto [it, inserted] = best.try_emplace(pairs[i].domain, i);
        if (!inserted && rank[i] > rank[it->second]) it->second = i;
      }
      double lowest = 2.0;
      for (const auto& [domain, i] : best) {
        const auto& c = per_domain[domain];
        const double kept = static_cast<double>(c[0] + c[1] + c[2]);
        const double frac = static_cast<double>(c[0]) / kept;
        if (frac < lowest) {
          lowest = frac;
          chosen = i;
        }
      }
      if (chosen) break;
    }
    if (!chosen) break;
    const std::size_t i = *chosen;
    const auto from = static_cast<std::size_t>(slot[i]);
    remove_eval(i);
    slot[i] = Slot::kTrain;
    --per_domain[pairs[i].domain][from];
    ++per_domain[pairs[i].domain][0];
    --totals[from];
    ++totals[0];
    ++report.rebalanced;
  }

  std::vector<SentencePair> train;
  std::vector<SentencePair> test;
  std::vector<SentencePair> validation;
  for (std::size_t i = 0; i < n; ++i) {
    switch (slot[i]) {
      case Slot::kTrain: train.push_back(pairs[i]); break;
      case Slot::kTest: test.push_back(pairs[i]); break;
      case Slot::kValidation: validation.push_back(pairs[i]); break;
      case Slot::kDropped: break;
    }
  }
  for (auto& [domain, c] : report.domains) {
    const auto it = per_domain.find(domain);
    if (it == per_domain.end()) continue;
    c.train = it->second[0];
    c.test = it->second[1];
    c.validation = it->second[2];
  }

  const Direction& dir = corpus.direction();
  return SplitBundle{Corpus(dir, std::move(train)), Corpus(dir, std::move(test)),
                     Corpus(dir, std::move(validation)), std::move(report), ratios, mode};
}

namespace {

void check_pair_duplicates(const Corpus& part, const std::vector<Keys>& keys, Rule rule,
                           const std::string& name, std::vector<Violation>& out) {
  std::unordered_map<std::string, std::size_t> first;
  for (std::size_t i = 0; i < part.size(); ++i) {
    auto [it, inserted] = first.try_emplace(pair_key(keys[i].src, keys[i].tgt), i);
    if (!inserted) {
      out.push_back(Violation{rule,
                              {part[it->second].origin, part[i].origin},
                              keys[i].src + " ||| " + keys[i].tgt,
                              "repeated (source key, target key) in " + name});
    }
  }
}

// One violation per (left pair, right pair) that share an overlap key.
void check_overlap(const Corpus& left, const std::vector<Keys>& left_keys, const Corpus& right,
                   const std::vector<Keys>& right_keys, OverlapMode mode, Rule rule,
                   const std::string& what, std::vector<Violation>& out) {
  std::unordered_map<std::string, std::vector<std::size_t>> index;
  for (std::size_t j = 0; j < right.size(); ++j) {
    for (const auto* k : overlap_keys(right_keys[j], mode)) index[*k].push_back(j);
  }
  for (std::size_t i = 0; i < left.size(); ++i) {
    std::map<std::size_t, std::string> hits;
    for (const auto* k : overlap_keys(left_keys[i], mode)) {
      if (auto it = index.find(*k); it != index.end()) {
        for (std::size_t j : it->second) hits.try_emplace(j, *k);
      }
    }
    for (const auto& [j, key] : hits) {
      out.push_back(Violation{rule, {left[i].origin, right[j].origin}, key, what});
    }
  }
}

void check_ratios(const std::string& slice, std::size_t train, std::size_t test,
                  std::size_t validation, const SplitRatios& ratios, std::vector<Violation>& out) {
  const std::size_t total = train + test + validation;
  if (total < kRatioCheckMinPairs) return;
  const std::array<std::pair<const char*, double>, 3> observed{{
      {"train", static_cast<double>(train) / static_cast<double>(total)},
      {"test", static_cast<double>(test) / static_cast<double>(total)},
      {"validation", static_cast<double>(validation) / static_cast<double>(total)},
  }};
  const std::array<double, 3> wanted{ratios.train, ratios.test, ratios.validation};
  for (std::size_t s = 0; s < 3; ++s) {
    if (std::abs(observed[s].second - wanted[s]) > kRatioTolerance) {
      out.push_back(Violation{Rule::kRatio, {}, "",
                              slice + " " + observed[s].first + " fraction " +
                                  std::to_string(observed[s].second) + " vs requested " +
                                  std::to_string(wanted[s])});
    }
  }
}

}  // namespace

std::vector<Violation> verify_bundle(const SplitBundle& bundle) {
  std::vector<Violation> out;
  const auto train_keys = compute_keys(bundle.train.pairs());
  const auto test_keys = compute_keys(bundle.test.pairs());
  const auto val_keys = compute_keys(bundle.validation.pairs());

  check_pair_duplicates(bundle.train, train_keys, Rule::kTrainDuplicate, "train", out);

  // Train against the union of test and validation.
  std::vector<SentencePair> eval_pairs = bundle.test.pairs();
  eval_pairs.insert(eval_pairs.end(), bundle.validation.begin(), bundle.validation.end());
  const Corpus eval(bundle.direction(), std::move(eval_pairs));
  std::vector<Keys> eval_keys = test_keys;
  eval_keys.insert(eval_keys.end(), val_keys.begin(), val_keys.end());
  check_overlap(bundle.train, train_keys, eval, eval_keys, bundle.mode, Rule::kTrainEvalOverlap,
                bundle.mode == OverlapMode::kStrict ? "train pair overlaps an evaluation pair"
                                                    : "train source overlaps an evaluation source",
                out);

  check_pair_duplicates(bundle.test, test_keys, Rule::kEvalConflict, "test", out);
  check_pair_duplicates(bundle.validation, val_keys, Rule::kEvalConflict, "validation", out);
  check_overlap(bundle.test, test_keys, bundle.validation, val_keys, bundle.mode,
                Rule::kEvalConflict, "test pair overlaps a validation pair", out);

  check_ratios("total", bundle.train.size(), bundle.test.size(), bundle.validation.size(),
               bundle.ratios, out);
  std::map<std::string, std::array<std::size_t, 3>> per_domain;
  for (const auto& p : bundle.train) ++per_domain[p.domain][0];
  for (const auto& p : bundle.test) ++per_domain[p.domain][1];
  for (const auto& p : bundle.validation) ++per_domain[p.domain][2];
  for (const auto& [domain, c] : per_domain) {
    check_ratios("domain '" + domain + "'", c[0], c[1], c[2], bundle.ratios, out);
  }
  return out;
}

}  // namespace geezmt
