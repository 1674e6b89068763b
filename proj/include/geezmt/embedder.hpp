#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geezmt {

// Sorted-index sparse vector.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  double dot(const SparseVector& other) const noexcept;
  double norm() const noexcept;
  bool operator==(const SparseVector&) const = default;
};

struct EmbedderIdentity {
  std::string name;
  std::string version;
  std::string fingerprint;  // parameters the vectors depend on

  std::string str() const { return name + "/" + version + "/" + fingerprint; }
  bool operator==(const EmbedderIdentity&) const = default;
};

class Embedder {
public:
  virtual ~Embedder() = default;
  virtual EmbedderIdentity identity() const = 0;
  virtual std::size_t dimension() const = 0;
  // Unit L2 norm for any text with non-whitespace content; zero otherwise.
  virtual SparseVector embed(std::string_view text) const = 0;
  virtual std::vector<SparseVector> embed_batch(std::span<const std::string> texts) const;
};

struct TfidfOptions {
  std::size_t dimension = 4096;
  std::size_t min_n = 2;
  std::size_t max_n = 4;
};

// Character n-gram TF-IDF with feature hashing. Text is NFC-normalized,
// lowercased, whitespace runs collapsed to one space and padded with a
// space on each side before n-grams are taken. IDF is smoothed,
// ln((1 + N) / (1 + df)) + 1, so every weight is positive.
class HashedTfidfEmbedder final : public Embedder {
public:
  // Unfitted: every idf weight is 1.
  explicit HashedTfidfEmbedder(TfidfOptions options = {});
  HashedTfidfEmbedder(TfidfOptions options, std::vector<double> idf);

  static HashedTfidfEmbedder fit(std::span<const std::string> documents,
                                 TfidfOptions options = {});

  EmbedderIdentity identity() const override;
  std::size_t dimension() const override { return options_.dimension; }
  SparseVector embed(std::string_view text) const override;

  const std::vector<double>& idf() const noexcept { return idf_; }
  const TfidfOptions& options() const noexcept { return options_; }

  // Bucket counts of the raw n-grams, before weighting.
  std::vector<std::pair<std::uint32_t, double>> term_counts(std::string_view text) const;

private:
  TfidfOptions options_;
  std::vector<double> idf_;
  std::string fingerprint_;
};

struct ServiceEmbedderOptions {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string model;
  std::string api_key;
  int timeout_ms = 30000;
};

// Adapter for an HTTP embedding service. Request body: {"model", "input": [..]};
// the response may carry {"data": [{"embedding": [..]}, ..]} or
// {"embeddings": [[..], ..]}. Returned vectors are L2-normalized.
class ServiceEmbedder final : public Embedder {
public:
  ServiceEmbedder(ServiceEmbedderOptions options, std::size_t dimension);

  EmbedderIdentity identity() const override;
  std::size_t dimension() const override { return dimension_; }
  SparseVector embed(std::string_view text) const override;
  std::vector<SparseVector> embed_batch(std::span<const std::string> texts) const override;

private:
  ServiceEmbedderOptions options_;
  std::size_t dimension_;
};

// Scales to unit norm; a zero vector is returned unchanged.
SparseVector l2_normalized(SparseVector v);

}  // namespace geezmt
