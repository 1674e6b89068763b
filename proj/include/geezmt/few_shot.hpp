#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "geezmt/backend.hpp"
#include "geezmt/corpus.hpp"
#include "geezmt/prompt.hpp"
#include "geezmt/retrieval.hpp"

namespace geezmt {

struct FewShotConfig {
  LanguageTag source_lang{"gez"};
  LanguageTag target_lang{"en"};
  std::string model = "text-davinci-003";
  BackendParams params;
  std::size_t max_matches = kMaxMatches;
};

struct FewShotResult {
  std::string translation;
  std::string prompt;
  CompletionRequest request;
  std::vector<Match> matches;
};

// retrieve -> build_prompt -> one completion call. The translation is the
// first line of the completion, trimmed. Throws EmptyCompletionError when
// that line is empty.
FewShotResult translate_few_shot(const RetrievalIndex& index, CompletionBackend& backend,
                                 std::string_view query, const FewShotConfig& config);

// Runs translate_few_shot over every query with at most `parallelism`
// requests in flight. Results keep input order. The first failure is
// rethrown after in-flight work drains.
std::vector<FewShotResult> translate_batch(const RetrievalIndex& index,
                                           CompletionBackend& backend,
                                           const std::vector<std::string>& queries,
                                           const FewShotConfig& config,
                                           std::size_t parallelism = 2);

}  // namespace geezmt
