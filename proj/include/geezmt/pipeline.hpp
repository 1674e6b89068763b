#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geezmt/backend.hpp"
#include "geezmt/corpus.hpp"
#include "geezmt/dedup_split.hpp"

namespace geezmt {

struct CorpusSource {
  std::string domain;
  std::filesystem::path stem;  // files are <stem>.<source code> and <stem>.<target code>
};

struct DirectionConfig {
  Direction direction;
  std::vector<CorpusSource> corpora;
};

struct FuzzyConfig {
  Direction direction{LanguageTag("gez"), LanguageTag("en")};
  std::size_t max_matches = 10;
  std::string model = "text-davinci-003";
  std::string endpoint;
  BackendParams params;
  int timeout_ms = 30000;
  int max_retries = 3;
  std::size_t parallelism = 2;
  std::string api_key_env = std::string(kDefaultApiKeyEnv);
};

// Loaded from an INI file:
//
//   [pipeline]   seed, out_dir, overlap_mode (strict | source-source)
//   [split]      train, test, validation
//   [bpe]        vocab_size, min_char_frequency, model, per_direction
//   [direction.en-gez]
//   corpora = bible:data/bible, tanzil:data/tanzil
//   [fuzzy]      direction, max_matches, endpoint, model, top_p, temperature,
//                length_multiplier, timeout_ms, max_retries, parallelism, api_key_env
//
// Relative paths resolve against the config file's directory; out_dir is
// taken as given.
struct PipelineConfig {
  std::filesystem::path base_dir = ".";
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 20230101;
  SplitRatios ratios;
  OverlapMode overlap_mode = OverlapMode::kStrict;
  std::size_t vocab_size = 8000;
  std::size_t min_char_frequency = 1;
  std::string bpe_model = "bpe/model.bpe";  // relative to out_dir
  bool bpe_per_direction = false;           // one model per direction instead of a joint one
  std::vector<DirectionConfig> directions;
  FuzzyConfig fuzzy;
  bool fuzzy_enabled = false;  // a [fuzzy] section was present

  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig parse(const std::string& text, const std::filesystem::path& base_dir);

  // Every check that can fail before work starts: ratios, duplicate
  // directions, corpus files present.
  void validate() const;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  // The joint model, or with a direction that direction's model under
  // <model dir>/<direction>/.
  std::filesystem::path bpe_model_path(std::optional<Direction> direction = std::nullopt) const;
  std::filesystem::path source_file(const DirectionConfig& d, const CorpusSource& c) const;
  std::filesystem::path target_file(const DirectionConfig& d, const CorpusSource& c) const;
};

// Each command writes under out_dir/<stage>/ and leaves a manifest.json
// there with the SHA-256 of every input and output, the seed and the tool
// version. Returns human-readable summary lines.
std::vector<std::string> cmd_ingest(const PipelineConfig& config);
std::vector<std::string> cmd_split(const PipelineConfig& config);
std::vector<std::string> cmd_stats(const PipelineConfig& config);
std::vector<std::string> cmd_tag(const PipelineConfig& config);
std::vector<std::string> cmd_bpe_train(const PipelineConfig& config);
std::vector<std::string> cmd_bpe_apply(const PipelineConfig& config);
std::vector<std::string> cmd_retrieve(const PipelineConfig& config,
                                      const std::filesystem::path& input);
std::vector<std::string> cmd_translate(const PipelineConfig& config,
                                       const std::filesystem::path& input);

struct BleuCommandOptions {
  bool smooth = false;
  bool both = false;  // report unsmoothed and smoothed
};

std::vector<std::string> cmd_bleu(const std::filesystem::path& hyp_path,
                                  const std::filesystem::path& ref_path,
                                  const BleuCommandOptions& options);

// Re-reads a split written by cmd_split.
SplitBundle load_split(const PipelineConfig& config, const Direction& direction);

inline constexpr std::string_view kToolVersion = "geezmt 1.0.0";

}  // namespace geezmt
