#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace geezmt {

struct BackendParams {
  double top_p = 1.0;
  double temperature = 0.3;
  double length_multiplier = 5.0;

  // ceil(length_multiplier * whitespace token count of the query), at least 1.
  std::size_t max_output_tokens(std::string_view query_source) const;
};

// Wire format: a single JSON object {model, prompt, temperature, top_p, max_tokens}.
struct CompletionRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.3;
  double top_p = 1.0;
  std::size_t max_tokens = 0;

  std::string to_json() const;
  static CompletionRequest from_json(std::string_view body);
  bool operator==(const CompletionRequest&) const = default;
};

// Pulls the completion text out of a response body: either
// {"choices": [{"text": ..}]} or {"text": ..}. Throws FormatError otherwise.
std::string parse_completion_response(std::string_view body);

class CompletionBackend {
public:
  virtual ~CompletionBackend() = default;
  // Raw completion text. Throws BackendError on transport or HTTP failure.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

inline constexpr std::string_view kDefaultApiKeyEnv = "GEEZMT_API_KEY";

struct HttpBackendOptions {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string api_key;   // sent as a bearer token when nonempty
  int timeout_ms = 30000;
  int max_retries = 3;
  int initial_backoff_ms = 250;
};

// Retries transport failures, 429 and 5xx with exponential backoff.
class HttpCompletionBackend final : public CompletionBackend {
public:
  explicit HttpCompletionBackend(HttpBackendOptions options);
  std::string complete(const CompletionRequest& request) override;

private:
  HttpBackendOptions options_;
};

struct ParsedUrl {
  std::string scheme_host_port;  // e.g. "http://127.0.0.1:8080"
  std::string path;
};

ParsedUrl parse_url(std::string_view url);

}  // namespace geezmt
