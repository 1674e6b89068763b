#include "geezmt/retrieval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "geezmt/error.hpp"

namespace geezmt {

namespace {
constexpr std::string_view kIndexFormat = "geezmt-retrieval-index";
constexpr int kIndexVersion = 1;
}  // namespace

RetrievalIndex::RetrievalIndex(std::shared_ptr<const Embedder> embedder, std::vector<IndexEntry> entries)
    : embedder_(std::move(embedder)), entries_(std::move(entries)) {
  if (!embedder_) throw std::invalid_argument("retrieval index needs an embedder");
  identity_ = embedder_->identity();
}

RetrievalIndex build_index(const Corpus& corpus, std::shared_ptr<const Embedder> embedder) {
  std::vector<std::string> sources;
  sources.reserve(corpus.size());
  for (const auto& p : corpus) sources.push_back(p.source_text);
  auto vectors = embedder->embed_batch(sources);
  std::vector<IndexEntry> entries;
  entries.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    entries.push_back(IndexEntry{corpus[i].source_text, corpus[i].target_text, std::move(vectors[i])});
  }
  return RetrievalIndex(std::move(embedder), std::move(entries));
}

std::vector<Match> retrieve(const RetrievalIndex& index, std::string_view query, std::size_t k) {
  if (k < 1 || k > kMaxMatches) {
    throw std::invalid_argument("k must be between 1 and " + std::to_string(kMaxMatches));
  }
  const SparseVector q = index.embedder().embed(query);
  const auto& entries = index.entries();
  std::vector<double> scores(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) scores[i] = q.dot(entries[i].vector);

  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  std::vector<Match> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const std::size_t i = order[r];
    out.push_back(Match{i, entries[i].source, entries[i].target, scores[i]});
  }
  return out;
}

void RetrievalIndex::save(const std::filesystem::path& path) const {
  nlohmann::json header{{"format", kIndexFormat},
                        {"version", kIndexVersion},
                        {"embedder",
                         {{"name", identity_.name},
                          {"version", identity_.version},
                          {"fingerprint", identity_.fingerprint}}},
                        {"dimension", embedder_->dimension()},
                        {"entries", entries_.size()}};
  std::string out = header.dump() + "\n";
  for (const auto& e : entries_) {
    out += nlohmann::json{{"source", e.source}, {"target", e.target}, {"indices", e.vector.indices},
                          {"values", e.vector.values}}
               .dump();
    out += '\n';
  }
  write_file(path, out);
}

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& path,
                                    std::shared_ptr<const Embedder> embedder) {
  const auto lines = split_lines(read_file(path));
  if (lines.empty()) throw FormatError("empty index file", 1);
  std::vector<IndexEntry> entries;
  try {
    const auto header = nlohmann::json::parse(lines[0]);
    if (header.at("format") != kIndexFormat) throw FormatError("not a retrieval index", 1);
    if (header.at("version") != kIndexVersion) throw FormatError("unsupported index version", 1);
    const EmbedderIdentity stored{header.at("embedder").at("name").get<std::string>(),
                                  header.at("embedder").at("version").get<std::string>(),
                                  header.at("embedder").at("fingerprint").get<std::string>()};
    if (stored != embedder->identity()) {
      throw ConfigError("index " + path.string() + " was built with embedder " + stored.str() +
                        ", not " + embedder->identity().str());
    }
    const auto count = header.at("entries").get<std::size_t>();
    if (lines.size() - 1 != count) throw FormatError("entry count does not match header", 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto j = nlohmann::json::parse(lines[i]);
      IndexEntry e{j.at("source").get<std::string>(), j.at("target").get<std::string>(), {}};
      e.vector.indices = j.at("indices").get<std::vector<std::uint32_t>>();
      e.vector.values = j.at("values").get<std::vector<double>>();
      if (e.vector.indices.size() != e.vector.values.size()) throw FormatError("ragged vector", i + 1);
      entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed index: ") + e.what());
  }
  return RetrievalIndex(std::move(embedder), std::move(entries));
}

}  // namespace geezmt
