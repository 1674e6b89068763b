#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "geezmt/corpus.hpp"
#include "geezmt/rng.hpp"
#include "geezmt/unicode.hpp"

namespace geezmt::testing {

// Small hand-rolled generator for property tests. Only ever produces
// characters whose Unicode properties the reference oracles below know.
class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t below(std::uint64_t n) { return uniform_below(rng_, n); }
  bool chance(double p) { return static_cast<double>(below(1'000'000)) < p * 1'000'000.0; }
  std::mt19937_64& engine() { return rng_; }

  char32_t latin() {
    const char32_t c = U'a' + static_cast<char32_t>(below(26));
    return chance(0.15) ? c - 32 : c;
  }

  // Assigned Ethiopic syllables between U+1200 and U+135A.
  char32_t ethiopic() {
    static constexpr std::array<std::pair<char32_t, char32_t>, 6> kRanges = {{
        {0x1200, 0x1248}, {0x1260, 0x1288}, {0x1290, 0x12B0},
        {0x12C8, 0x12D6}, {0x12D8, 0x1310}, {0x1318, 0x135A},
    }};
    std::uint64_t total = 0;
    for (const auto& [lo, hi] : kRanges) total += hi - lo + 1;
    std::uint64_t pick = below(total);
    for (const auto& [lo, hi] : kRanges) {
      if (pick <= hi - lo) return lo + static_cast<char32_t>(pick);
      pick -= hi - lo + 1;
    }
    return kRanges[0].first;
  }

  std::string word(bool ethiopic_script, std::size_t min_len = 1, std::size_t max_len = 7) {
    std::u32string w;
    const std::size_t n = min_len + below(max_len - min_len + 1);
    for (std::size_t i = 0; i < n; ++i) w += ethiopic_script ? ethiopic() : latin();
    return unicode::to_utf8(w);
  }

  // Words joined by single spaces, optionally with trailing punctuation.
  std::string sentence(bool ethiopic_script, std::size_t min_words = 1, std::size_t max_words = 9,
                       bool punctuate = true) {
    const std::size_t n = min_words + below(max_words - min_words + 1);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += word(ethiopic_script);
      if (punctuate && i + 1 < n && chance(0.1)) s += ethiopic_script ? "፣" : ",";
    }
    if (punctuate) s += ethiopic_script ? "።" : (chance(0.5) ? "." : "!");
    return s;
  }

  // Either script per word.
  std::string mixed_sentence(std::size_t min_words = 1, std::size_t max_words = 9) {
    const std::size_t n = min_words + below(max_words - min_words + 1);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += word(chance(0.5));
      if (chance(0.1)) s += chance(0.5) ? "።" : ".";
    }
    return s;
  }

  // Same key, different surface: case flips, extra punctuation and spaces.
  std::string perturb(const std::string& text) {
    std::string out;
    for (char32_t cp : unicode::to_u32(text)) {
      if (cp >= U'a' && cp <= U'z' && chance(0.2)) cp -= 32;
      out += unicode::to_utf8(cp);
      if (cp == U' ' && chance(0.2)) out += chance(0.5) ? "  " : "- ";
    }
    return out + (chance(0.5) ? "?!" : " ፧");
  }

private:
  std::mt19937_64 rng_;
};

// Key oracle for generator output: ASCII lowercase, drop the punctuation
// the generator can emit, drop spaces. Written without ICU on purpose.
inline std::string reference_key(const std::string& text) {
  static const std::set<char32_t> kPunct = {U'.', U',', U'!', U'?', U'-', U';', U':', U'\'', U'"',
                                            U'(', U')', 0x1360, 0x1361, 0x1362, 0x1363, 0x1364,
                                            0x1365, 0x1366, 0x1367, 0x1368};
  std::u32string out;
  for (char32_t cp : unicode::to_u32(text)) {
    if (cp == U' ' || cp == U'\t' || kPunct.contains(cp)) continue;
    if (cp >= U'A' && cp <= U'Z') cp += 32;
    out += cp;
  }
  return unicode::to_utf8(out);
}

struct SyntheticCorpus {
  Corpus corpus;
  std::size_t injected_duplicates = 0;
  std::size_t contaminated = 0;
};

// 5,000 pairs over three domains. Base pairs have globally unique keys on
// both sides. `contamination` of the pairs get one side replaced by a
// perturbed copy of a sentence from another domain, so their keys collide
// across pairs without the pair itself repeating; `duplicates` pairs are
// perturbed copies of earlier pairs.
inline SyntheticCorpus make_synthetic_corpus(std::uint64_t seed, std::size_t total = 5000,
                                             double contamination = 0.05,
                                             std::size_t duplicates = 137) {
  Gen g(seed);
  const Direction dir(LanguageTag("en"), LanguageTag("gez"));
  const std::array<std::string, 3> domains = {"bible", "news", "tanzil"};
  const std::size_t base = total - duplicates;

  std::set<std::string> keys;
  auto fresh = [&](bool ethiopic) {
    while (true) {
      std::string s = g.sentence(ethiopic, 3, 10);
      if (keys.insert(reference_key(s)).second) return s;
    }
  };

  std::vector<SentencePair> pairs;
  pairs.reserve(total);
  for (std::size_t i = 0; i < base; ++i) {
    pairs.push_back(SentencePair{fresh(false), fresh(true), dir, domains[g.below(domains.size())],
                                 "synthetic:" + std::to_string(i + 1)});
  }

  const auto contaminated = static_cast<std::size_t>(contamination * static_cast<double>(total));
  std::set<std::size_t> touched;
  std::size_t done = 0;
  while (done < contaminated) {
    const std::size_t a = g.below(base);
    const std::size_t b = g.below(base);
    if (a == b || pairs[a].domain == pairs[b].domain || touched.contains(a) || touched.contains(b)) continue;
    touched.insert(a);
    touched.insert(b);
    // Copy a source or a target of b into the same side of a; one in four
    // copies goes to the opposite side to exercise source-target overlap.
    const bool to_source = g.chance(0.5);
    const bool cross_side = g.chance(0.25);
    const std::string& donor = cross_side ? (to_source ? pairs[b].target_text : pairs[b].source_text)
                                          : (to_source ? pairs[b].source_text : pairs[b].target_text);
    (to_source ? pairs[a].source_text : pairs[a].target_text) = g.perturb(donor);
    ++done;
  }

  for (std::size_t i = 0; i < duplicates; ++i) {
    const SentencePair& src = pairs[g.below(base)];
    SentencePair copy = src;
    copy.source_text = g.perturb(src.source_text);
    copy.target_text = g.perturb(src.target_text);
    copy.origin = "synthetic-dup:" + std::to_string(i + 1);
    pairs.insert(pairs.begin() + static_cast<std::ptrdiff_t>(g.below(pairs.size() + 1)), std::move(copy));
  }
  return SyntheticCorpus{Corpus(dir, std::move(pairs)), duplicates, contaminated};
}

// Size of a pair-deduplicated corpus by exhaustive pairwise comparison of
// reference keys: a pair survives when no earlier pair has equal keys.
inline std::size_t brute_force_dedup_size(const Corpus& c) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& p : c) keys.emplace_back(reference_key(p.source_text), reference_key(p.target_text));
  std::size_t kept = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) seen = keys[j] == keys[i];
    kept += seen ? 0 : 1;
  }
  return kept;
}

// Number of (train, eval) pairs whose keys collide under the strict rule,
// by scanning every combination.
inline std::size_t brute_force_collisions(const Corpus& train, const Corpus& eval, bool strict = true) {
  std::vector<std::array<std::string, 2>> tk;
  std::vector<std::array<std::string, 2>> ek;
  for (const auto& p : train) tk.push_back({reference_key(p.source_text), reference_key(p.target_text)});
  for (const auto& p : eval) ek.push_back({reference_key(p.source_text), reference_key(p.target_text)});
  std::size_t hits = 0;
  for (const auto& t : tk) {
    for (const auto& e : ek) {
      const bool hit = strict ? (t[0] == e[0] || t[0] == e[1] || t[1] == e[0] || t[1] == e[1])
                              : t[0] == e[0];
      hits += hit ? 1 : 0;
    }
  }
  return hits;
}

// Scratch directory removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("geezmt-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
  std::filesystem::path path_;
};

}  // namespace geezmt::testing
