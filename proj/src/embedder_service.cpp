#include "httplib.h"
#include "json.hpp"

#include "geezmt/backend.hpp"
#include "geezmt/embedder.hpp"
#include "geezmt/error.hpp"

namespace geezmt {

ServiceEmbedder::ServiceEmbedder(ServiceEmbedderOptions options, std::size_t dimension)
    : options_(std::move(options)), dimension_(dimension) {
  if (dimension_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

EmbedderIdentity ServiceEmbedder::identity() const {
  return EmbedderIdentity{"service:" + options_.model, "1", std::to_string(dimension_)};
}

SparseVector ServiceEmbedder::embed(std::string_view text) const {
  const std::string single(text);
  return embed_batch(std::span<const std::string>(&single, 1)).front();
}

std::vector<SparseVector> ServiceEmbedder::embed_batch(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  const ParsedUrl url = parse_url(options_.endpoint);
  httplib::Client client(url.scheme_host_port);
  const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  nlohmann::json body{{"model", options_.model},
                      {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) throw BackendError(0, true, "embedding request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw BackendError(res->status, res->status == 429 || res->status >= 500, "embedding request rejected");
  }

  std::vector<std::vector<double>> dense;
  try {
    const auto reply = nlohmann::json::parse(res->body);
    if (reply.contains("data")) {
      for (const auto& item : reply.at("data")) dense.push_back(item.at("embedding").get<std::vector<double>>());
    } else {
      dense = reply.at("embeddings").get<std::vector<std::vector<double>>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("unexpected embedding response: ") + e.what());
  }
  if (dense.size() != texts.size()) throw FormatError("embedding response has the wrong number of vectors");

  std::vector<SparseVector> out;
  for (const auto& d : dense) {
    if (d.size() != dimension_) throw FormatError("embedding has dimension " + std::to_string(d.size()));
    SparseVector v;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i] != 0.0) {
        v.indices.push_back(static_cast<std::uint32_t>(i));
        v.values.push_back(d[i]);
      }
    }
    out.push_back(l2_normalized(std::move(v)));
  }
  return out;
}

}  // namespace geezmt
