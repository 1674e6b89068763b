#include "httplib.h"
#include "json.hpp"

#include "geezmt/backend.hpp"

#include <cmath>
#include <thread>

#include "geezmt/error.hpp"
#include "geezmt/unicode.hpp"

namespace geezmt {

std::size_t BackendParams::max_output_tokens(std::string_view query_source) const {
  const auto tokens = static_cast<double>(unicode::split_whitespace(query_source).size());
  const auto n = static_cast<std::size_t>(std::ceil(length_multiplier * tokens));
  return std::max<std::size_t>(n, 1);
}

std::string CompletionRequest::to_json() const {
  return nlohmann::json{{"model", model},
                        {"prompt", prompt},
                        {"temperature", temperature},
                        {"top_p", top_p},
                        {"max_tokens", max_tokens}}
      .dump();
}

CompletionRequest CompletionRequest::from_json(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return CompletionRequest{j.at("model").get<std::string>(), j.at("prompt").get<std::string>(),
                             j.at("temperature").get<double>(), j.at("top_p").get<double>(),
                             j.at("max_tokens").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed completion request: ") + e.what());
  }
}

std::string parse_completion_response(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    if (j.contains("choices")) return j.at("choices").at(0).at("text").get<std::string>();
    return j.at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("unexpected completion response: ") + e.what());
  }
}

ParsedUrl parse_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ConfigError("endpoint '" + std::string(url) + "' must start with http:// or https://");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported endpoint scheme '" + std::string(scheme) + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) return ParsedUrl{std::string(url), "/"};
  return ParsedUrl{std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

HttpCompletionBackend::HttpCompletionBackend(HttpBackendOptions options) : options_(std::move(options)) {
  parse_url(options_.endpoint);
}

std::string HttpCompletionBackend::complete(const CompletionRequest& request) {
  const ParsedUrl url = parse_url(options_.endpoint);
  const std::string body = request.to_json();
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  int last_status = 0;
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(options_.initial_backoff_ms) * (1 << (attempt - 1)));
    }
    httplib::Client client(url.scheme_host_port);
    const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    const auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return parse_completion_response(res->body);
    last_status = res->status;
    last_error = "HTTP error";
    if (res->status != 429 && res->status < 500) {
      throw BackendError(res->status, false, "completion request rejected");
    }
  }
  throw BackendError(last_status, true,
                     "completion request failed after " + std::to_string(options_.max_retries + 1) +
                         " attempt(s): " + last_error);
}

}  // namespace geezmt
