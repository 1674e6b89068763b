#include "geezmt/few_shot.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "geezmt/error.hpp"
#include "geezmt/unicode.hpp"

namespace geezmt {

FewShotResult translate_few_shot(const RetrievalIndex& index, CompletionBackend& backend,
                                 std::string_view query, const FewShotConfig& config) {
  FewShotResult result;
  result.matches = retrieve(index, query, config.max_matches);

  PromptSpec spec{{}, std::string(query), config.source_lang, config.target_lang};
  for (const auto& m : result.matches) spec.examples.push_back(PromptExample{m.source, m.target});
  result.prompt = build_prompt(spec);

  result.request = CompletionRequest{config.model, result.prompt, config.params.temperature,
                                     config.params.top_p, config.params.max_output_tokens(query)};
  const std::string completion = backend.complete(result.request);

  const auto nl = completion.find_first_of("\r\n");
  result.translation = unicode::trim(completion.substr(0, nl));
  if (result.translation.empty()) throw EmptyCompletionError();
  return result;
}

std::vector<FewShotResult> translate_batch(const RetrievalIndex& index, CompletionBackend& backend,
                                           const std::vector<std::string>& queries,
                                           const FewShotConfig& config, std::size_t parallelism) {
  std::vector<std::optional<FewShotResult>> slots(queries.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= queries.size()) return;
      try {
        slots[i] = translate_few_shot(index, backend, queries[i], config);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::max<std::size_t>(1, std::min(parallelism, queries.size()));
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<FewShotResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace geezmt
