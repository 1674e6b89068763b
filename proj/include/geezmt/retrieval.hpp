#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "geezmt/corpus.hpp"
#include "geezmt/embedder.hpp"

namespace geezmt {

struct IndexEntry {
  std::string source;
  std::string target;
  SparseVector vector;
};

struct Match {
  std::size_t position;
  std::string source;
  std::string target;
  double similarity;
};

inline constexpr std::size_t kMaxMatches = 10;

// Exhaustive cosine-similarity index over source sentences. Immutable once
// built; safe for concurrent retrieval.
class RetrievalIndex {
public:
  RetrievalIndex(std::shared_ptr<const Embedder> embedder, std::vector<IndexEntry> entries);

  const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const EmbedderIdentity& embedder_identity() const noexcept { return identity_; }
  const Embedder& embedder() const noexcept { return *embedder_; }

  void save(const std::filesystem::path& path) const;
  // Throws ConfigError if the file was written with a different embedder.
  static RetrievalIndex load(const std::filesystem::path& path,
                             std::shared_ptr<const Embedder> embedder);

private:
  std::shared_ptr<const Embedder> embedder_;
  EmbedderIdentity identity_;
  std::vector<IndexEntry> entries_;
};

RetrievalIndex build_index(const Corpus& corpus, std::shared_ptr<const Embedder> embedder);

// Top-k by similarity, descending; equal similarities keep index order.
// 1 <= k <= kMaxMatches.
std::vector<Match> retrieve(const RetrievalIndex& index, std::string_view query, std::size_t k);

}  // namespace geezmt
