#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace geezmt {

inline constexpr std::string_view kWordEnd = "</w>";
inline constexpr std::string_view kUnknownToken = "<unk>";
inline constexpr std::string_view kPaddingToken = "<pad>";

struct Merge {
  std::string left;
  std::string right;

  bool operator==(const Merge&) const = default;
};

struct BpeTrainOptions {
  std::size_t vocab_size = 8000;
  // Extra reserved tokens (target-language tags); <unk> and <pad> are
  // always reserved.
  std::vector<std::string> specials;
  // Characters seen fewer times than this stay out of the base alphabet.
  std::size_t min_char_frequency = 1;
};

// Subword model with a suffix end-of-word marker. Vocabulary ids are laid
// out as: specials, then the base alphabet in code-point order, the word
// end marker, then merge products in learning order.
//
// Whole words equal to a tag special are emitted as that token and never
// split or merged; no merge ever spells a special or the marker text.
class BpeModel {
public:
  BpeModel() = default;
  BpeModel(std::vector<std::string> specials, std::vector<Merge> merges,
           std::vector<std::string> vocab);

  const std::vector<std::string>& specials() const noexcept { return specials_; }
  const std::vector<Merge>& merges() const noexcept { return merges_; }
  // Tokens by id.
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }

  bool contains(std::string_view token) const;
  std::int64_t id_of(std::string_view token) const;  // -1 when absent
  bool is_special(std::string_view token) const;

  std::vector<std::string> encode(std::string_view text) const;
  std::vector<std::int64_t> encode_ids(std::string_view text) const;
  std::string decode(const std::vector<std::string>& tokens) const;
  std::string decode_ids(const std::vector<std::int64_t>& ids) const;

  // Copy restricted to the first `count` merges; vocabulary keeps the base
  // alphabet and the products of those merges.
  BpeModel truncated(std::size_t count) const;

  void save(const std::filesystem::path& path) const;
  static BpeModel load(const std::filesystem::path& path);
  std::string serialize() const;
  static BpeModel parse(std::string_view text);

  bool operator==(const BpeModel& other) const {
    return specials_ == other.specials_ && merges_ == other.merges_ &&
           vocab_ == other.vocab_;
  }

private:
  void encode_word(std::string_view word, std::vector<std::string>& out) const;

  struct PairHash {
    std::size_t operator()(const std::pair<std::string, std::string>& p) const noexcept;
  };

  std::vector<std::string> specials_;
  std::vector<Merge> merges_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::int64_t> ids_;
  std::unordered_map<std::pair<std::string, std::string>, std::size_t, PairHash> ranks_;
};

// Minimum vocab_size accepted by bpe_train for these sides and options.
std::size_t bpe_base_vocab_size(const std::vector<std::vector<std::string>>& sides,
                                const BpeTrainOptions& options);

// Learns merges over the pooled whitespace-separated words of every side.
// Pooling all sides is what makes the vocabulary shared. The most frequent
// adjacent pair wins; ties go to the lexicographically smaller (left, right).
BpeModel bpe_train(const std::vector<std::vector<std::string>>& sides,
                   const BpeTrainOptions& options);

}  // namespace geezmt
