#include "geezmt/embedder.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "geezmt/hash.hpp"
#include "geezmt/unicode.hpp"

namespace geezmt {

double SparseVector::dot(const SparseVector& other) const noexcept {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < indices.size() && j < other.indices.size()) {
    if (indices[i] == other.indices[j]) {
      sum += values[i] * other.values[j];
      ++i;
      ++j;
    } else if (indices[i] < other.indices[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum;
}

double SparseVector::norm() const noexcept {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

SparseVector l2_normalized(SparseVector v) {
  const double n = v.norm();
  if (n > 0.0) {
    for (double& x : v.values) x /= n;
  }
  return v;
}

std::vector<SparseVector> Embedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<SparseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

namespace {

constexpr std::string_view kTfidfName = "char-ngram-tfidf";
constexpr std::string_view kTfidfVersion = "1";

// NFC, lowercase, whitespace runs collapsed; padded with one space per
// side. Empty when the text has no visible content.
std::u32string prepare(std::string_view text) {
  std::u32string out = U" ";
  bool pending_space = false;
  for (char32_t cp : unicode::to_u32(unicode::nfc(text))) {
    if (unicode::is_whitespace(cp)) {
      pending_space = out.size() > 1;
      continue;
    }
    if (pending_space) out += U' ';
    pending_space = false;
    out += unicode::to_lower(cp);
  }
  if (out.size() == 1) return {};
  out += U' ';
  return out;
}

void check_options(const TfidfOptions& o) {
  if (o.dimension == 0 || o.min_n == 0 || o.min_n > o.max_n) {
    throw std::invalid_argument("invalid TF-IDF options");
  }
}

}  // namespace

HashedTfidfEmbedder::HashedTfidfEmbedder(TfidfOptions options)
    : HashedTfidfEmbedder(options, std::vector<double>(options.dimension, 1.0)) {}

HashedTfidfEmbedder::HashedTfidfEmbedder(TfidfOptions options, std::vector<double> idf)
    : options_(options), idf_(std::move(idf)) {
  check_options(options_);
  if (idf_.size() != options_.dimension) throw std::invalid_argument("idf size does not match dimension");
  std::uint64_t h = fnv1a64("tfidf");
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  mix(options_.dimension);
  mix(options_.min_n);
  mix(options_.max_n);
  for (double w : idf_) mix(std::bit_cast<std::uint64_t>(w));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  fingerprint_ = buf;
}

std::vector<std::pair<std::uint32_t, double>> HashedTfidfEmbedder::term_counts(std::string_view text) const {
  const std::u32string padded = prepare(text);
  std::map<std::uint32_t, double> counts;
  for (std::size_t n = options_.min_n; n <= options_.max_n; ++n) {
    if (padded.size() < n) break;
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
      const std::string gram = unicode::to_utf8(std::u32string_view(padded).substr(i, n));
      counts[static_cast<std::uint32_t>(fnv1a64(gram) % options_.dimension)] += 1.0;
    }
  }
  return {counts.begin(), counts.end()};
}

HashedTfidfEmbedder HashedTfidfEmbedder::fit(std::span<const std::string> documents, TfidfOptions options) {
  check_options(options);
  const HashedTfidfEmbedder counter(options);
  std::vector<std::size_t> df(options.dimension, 0);
  for (const auto& doc : documents) {
    for (const auto& [bucket, _] : counter.term_counts(doc)) ++df[bucket];
  }
  const double n = static_cast<double>(documents.size());
  std::vector<double> idf(options.dimension);
  for (std::size_t b = 0; b < options.dimension; ++b) {
    idf[b] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[b]))) + 1.0;
  }
  return HashedTfidfEmbedder(options, std::move(idf));
}

EmbedderIdentity HashedTfidfEmbedder::identity() const {
  return EmbedderIdentity{std::string(kTfidfName), std::string(kTfidfVersion), fingerprint_};
}

SparseVector HashedTfidfEmbedder::embed(std::string_view text) const {
  SparseVector v;
  for (const auto& [bucket, count] : term_counts(text)) {
    v.indices.push_back(bucket);
    v.values.push_back(count * idf_[bucket]);
  }
  return l2_normalized(std::move(v));
}

}  // namespace geezmt
