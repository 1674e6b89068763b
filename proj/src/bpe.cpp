#include "geezmt/bpe.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "geezmt/corpus.hpp"
#include "geezmt/error.hpp"
#include "geezmt/hash.hpp"
#include "geezmt/unicode.hpp"

namespace geezmt {

namespace {

std::vector<std::string> reserved_specials(const std::vector<std::string>& extra) {
  std::vector<std::string> out{std::string(kUnknownToken), std::string(kPaddingToken)};
  for (const auto& s : extra) {
    if (s.empty() || s == kWordEnd) throw ConfigError("invalid special token '" + s + "'");
    for (char32_t cp : unicode::to_u32(s)) {
      if (unicode::is_whitespace(cp)) throw ConfigError("special token '" + s + "' contains whitespace");
    }
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

struct WordTable {
  std::map<std::string, std::size_t> words;           // word -> frequency
  std::map<char32_t, std::size_t> char_frequency;
};

WordTable count_words(const std::vector<std::vector<std::string>>& sides,
                      const std::vector<std::string>& specials) {
  const std::unordered_set<std::string> special_set(specials.begin(), specials.end());
  WordTable table;
  for (const auto& side : sides) {
    for (const auto& sentence : side) {
      for (auto& word : unicode::split_whitespace(sentence)) {
        if (special_set.contains(word) && word != kUnknownToken && word != kPaddingToken) continue;
        ++table.words[std::move(word)];
      }
    }
  }
  for (const auto& [word, freq] : table.words) {
    for (char32_t cp : unicode::to_u32(word)) table.char_frequency[cp] += freq;
  }
  return table;
}

std::vector<char32_t> alphabet_of(const WordTable& table, std::size_t min_frequency) {
  std::vector<char32_t> alphabet;
  for (const auto& [cp, freq] : table.char_frequency) {
    if (freq >= min_frequency) alphabet.push_back(cp);
  }
  return alphabet;
}

constexpr std::uint32_t kBarrier = UINT32_MAX;

std::uint64_t pack(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

class Trainer {
public:
  Trainer(const WordTable& table, const std::vector<char32_t>& alphabet,
          const std::vector<std::string>& specials)
      : specials_(specials.begin(), specials.end()), order_(PairOrder{&symbols_}) {
    for (char32_t cp : alphabet) intern(unicode::to_utf8(cp));
    marker_ = intern(std::string(kWordEnd));
    terminal_.assign(symbols_.size(), false);
    terminal_[marker_] = true;
    const std::unordered_set<char32_t> known(alphabet.begin(), alphabet.end());
    for (const auto& [word, freq] : table.words) {
      std::vector<std::uint32_t> syms;
      for (char32_t cp : unicode::to_u32(word)) {
        syms.push_back(known.contains(cp) ? ids_.at(unicode::to_utf8(cp)) : kBarrier);
      }
      syms.push_back(marker_);
      words_.push_back(std::move(syms));
      freqs_.push_back(static_cast<std::int64_t>(freq));
    }
    for (std::uint32_t w = 0; w < words_.size(); ++w) {
      for_each_pair(words_[w], [&](std::uint64_t p) {
        counts_[p] += freqs_[w];
        occurrences_[p].insert(w);
      });
    }
    for (const auto& [p, c] : counts_) order_.insert({c, p});
  }

  // Learns merges until `budget` new vocabulary entries exist or no pair
  // is left.
  void run(std::size_t budget, std::vector<Merge>& merges, std::vector<std::string>& products) {
    while (products.size() < budget && !order_.empty()) {
      const Entry best = *order_.begin();
      const auto a = static_cast<std::uint32_t>(best.pair >> 32);
      const auto b = static_cast<std::uint32_t>(best.pair & 0xFFFFFFFFu);
      std::string product = symbols_[a] + symbols_[b];
      if (specials_.contains(product) || fake_marker(b, product)) {
        // Would spell a special token or the word-end marker out of
        // ordinary characters.
        order_.erase(order_.begin());
        banned_.insert(best.pair);
        continue;
      }
      merges.push_back(Merge{symbols_[a], symbols_[b]});
      if (!ids_.contains(product)) products.push_back(product);
      const std::uint32_t merged = intern(product);
      terminal_.resize(symbols_.size(), false);
      terminal_[merged] = terminal_[b];
      apply(a, b, merged);
    }
  }

private:
  struct Entry {
    std::int64_t count;
    std::uint64_t pair;
  };

  // Highest count first; ties by (left, right) string order.
  struct PairOrder {
    const std::vector<std::string>* symbols;
    bool operator()(const Entry& x, const Entry& y) const {
      if (x.count != y.count) return x.count > y.count;
      const auto& xl = (*symbols)[x.pair >> 32];
      const auto& yl = (*symbols)[y.pair >> 32];
      if (xl != yl) return xl < yl;
      return (*symbols)[x.pair & 0xFFFFFFFFu] < (*symbols)[y.pair & 0xFFFFFFFFu];
    }
  };

  // The marker text may only appear as the suffix contributed by the real
  // marker symbol.
  bool fake_marker(std::uint32_t right, const std::string& product) const {
    const auto pos = product.find(kWordEnd);
    if (pos == std::string::npos) return false;
    return !terminal_[right] || pos != product.size() - kWordEnd.size();
  }

  template <typename F>
  static void for_each_pair(const std::vector<std::uint32_t>& syms, F&& f) {
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      if (syms[i] == kBarrier || syms[i + 1] == kBarrier) continue;
      f(pack(syms[i], syms[i + 1]));
    }
  }

  std::uint32_t intern(const std::string& s) {
    auto [it, inserted] = ids_.try_emplace(s, static_cast<std::uint32_t>(symbols_.size()));
    if (inserted) symbols_.push_back(s);
    return it->second;
  }

  void apply(std::uint32_t a, std::uint32_t b, std::uint32_t merged) {
    const std::uint64_t target = pack(a, b);
    auto node = occurrences_.extract(target);
    if (node.empty()) return;
    std::vector<std::uint32_t> affected(node.mapped().begin(), node.mapped().end());
    std::sort(affected.begin(), affected.end());

    std::unordered_map<std::uint64_t, std::int64_t> delta;
    for (std::uint32_t w : affected) {
      auto& syms = words_[w];
      const std::int64_t f = freqs_[w];
      bool present = false;
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        if (syms[i] == a && syms[i + 1] == b) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      for_each_pair(syms, [&](std::uint64_t p) { delta[p] -= f; });
      std::vector<std::uint32_t> next;
      next.reserve(syms.size());
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == a && syms[i + 1] == b) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(syms[i]);
        }
      }
      syms = std::move(next);
      for_each_pair(syms, [&](std::uint64_t p) {
        delta[p] += f;
        if (p != target) occurrences_[p].insert(w);
      });
    }
    for (const auto& [p, d] : delta) {
      if (d == 0) continue;
      auto it = counts_.find(p);
      const std::int64_t old = it == counts_.end() ? 0 : it->second;
      if (old > 0 && !banned_.contains(p)) order_.erase(Entry{old, p});
      const std::int64_t now = old + d;
      if (now > 0) {
        counts_[p] = now;
        if (!banned_.contains(p)) order_.insert(Entry{now, p});
      } else if (it != counts_.end()) {
        counts_.erase(it);
      }
    }
  }

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::uint32_t marker_ = 0;
  std::vector<bool> terminal_;  // symbol ends with the word-end marker
  std::vector<std::vector<std::uint32_t>> words_;
  std::vector<std::int64_t> freqs_;
  std::unordered_map<std::uint64_t, std::int64_t> counts_;
  std::unordered_map<std::uint64_t, std::unordered_set<std::uint32_t>> occurrences_;
  std::unordered_set<std::string> specials_;
  std::unordered_set<std::uint64_t> banned_;
  std::set<Entry, PairOrder> order_;
};

}  // namespace

std::size_t BpeModel::PairHash::operator()(
    const std::pair<std::string, std::string>& p) const noexcept {
  return static_cast<std::size_t>(fnv1a64(p.second, fnv1a64(p.first) ^ 0x1f));
}

BpeModel::BpeModel(std::vector<std::string> specials, std::vector<Merge> merges,
                   std::vector<std::string> vocab)
    : specials_(std::move(specials)), merges_(std::move(merges)), vocab_(std::move(vocab)) {
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (vocab_[i].empty()) throw FormatError("empty vocabulary token");
    if (!ids_.emplace(vocab_[i], static_cast<std::int64_t>(i)).second) {
      throw FormatError("duplicate vocabulary entry '" + vocab_[i] + "'");
    }
  }
  if (std::find(specials_.begin(), specials_.end(), kUnknownToken) == specials_.end()) {
    throw FormatError("specials must include " + std::string(kUnknownToken));
  }
  const std::unordered_set<std::string> special_set(specials_.begin(), specials_.end());
  if (special_set.size() != specials_.size()) throw FormatError("duplicate special token");
  for (const auto& s : specials_) {
    if (!ids_.contains(s)) throw FormatError("special '" + s + "' missing from vocabulary");
  }
  if (!ids_.contains(std::string(kWordEnd))) throw FormatError("word-end marker missing from vocabulary");
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    const auto& m = merges_[r];
    if (special_set.contains(m.left) || special_set.contains(m.right)) {
      throw FormatError("merge " + std::to_string(r) + " involves a special token");
    }
    if (!ids_.contains(m.left + m.right)) {
      throw FormatError("merge product '" + m.left + m.right + "' missing from vocabulary");
    }
    ranks_.try_emplace({m.left, m.right}, r);
  }
}

bool BpeModel::contains(std::string_view token) const { return ids_.contains(std::string(token)); }

std::int64_t BpeModel::id_of(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? -1 : it->second;
}

bool BpeModel::is_special(std::string_view token) const {
  return std::find(specials_.begin(), specials_.end(), token) != specials_.end();
}

void BpeModel::encode_word(std::string_view word, std::vector<std::string>& out) const {
  // Tags pass through whole. <unk> and <pad> typed as words are spelled
  // out like any other text, since decoding glues <unk> to its neighbours.
  if (is_special(word) && word != kUnknownToken && word != kPaddingToken) {
    out.emplace_back(word);
    return;
  }
  std::vector<std::string> syms;
  std::vector<bool> unknown;
  for (char32_t cp : unicode::to_u32(word)) {
    std::string s = unicode::to_utf8(cp);
    const bool known = ids_.contains(s);
    syms.push_back(known ? std::move(s) : std::string(kUnknownToken));
    unknown.push_back(!known);
  }
  syms.emplace_back(kWordEnd);
  unknown.push_back(false);

  while (syms.size() > 1) {
    std::size_t best_rank = SIZE_MAX;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      if (unknown[i] || unknown[i + 1]) continue;
      if (auto it = ranks_.find({syms[i], syms[i + 1]}); it != ranks_.end()) {
        best_rank = std::min(best_rank, it->second);
      }
    }
    if (best_rank == SIZE_MAX) break;
    const Merge& m = merges_[best_rank];
    std::vector<std::string> next;
    std::vector<bool> next_unknown;
    for (std::size_t i = 0; i < syms.size(); ++i) {
      if (i + 1 < syms.size() && !unknown[i] && !unknown[i + 1] && syms[i] == m.left &&
          syms[i + 1] == m.right) {
        next.push_back(syms[i] + syms[i + 1]);
        next_unknown.push_back(false);
        ++i;
      } else {
        next.push_back(std::move(syms[i]));
        next_unknown.push_back(unknown[i]);
      }
    }
    syms = std::move(next);
    unknown = std::move(next_unknown);
  }
  for (auto& s : syms) out.push_back(std::move(s));
}

std::vector<std::string> BpeModel::encode(std::string_view text) const {
  std::vector<std::string> out;
  for (const auto& word : unicode::split_whitespace(text)) encode_word(word, out);
  return out;
}

std::vector<std::int64_t> BpeModel::encode_ids(std::string_view text) const {
  std::vector<std::int64_t> ids;
  for (const auto& t : encode(text)) ids.push_back(ids_.at(t));
  return ids;
}

std::string BpeModel::decode(const std::vector<std::string>& tokens) const {
  std::string out;
  for (const auto& t : tokens) {
    if (!ids_.contains(t)) throw Error("decode", "token '" + t + "' is not in the vocabulary");
    if (t == kPaddingToken) continue;
    if (t == kUnknownToken) {
      out += t;
    } else if (is_special(t)) {
      out += t;
      out += ' ';
    } else if (t.ends_with(kWordEnd)) {
      out.append(t, 0, t.size() - kWordEnd.size());
      out += ' ';
    } else {
      out += t;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string BpeModel::decode_ids(const std::vector<std::int64_t>& ids) const {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) {
      throw Error("decode", "token id " + std::to_string(id) + " is out of range");
    }
    tokens.push_back(vocab_[static_cast<std::size_t>(id)]);
  }
  return decode(tokens);
}

BpeModel BpeModel::truncated(std::size_t count) const {
  count = std::min(count, merges_.size());
  const auto base_end = static_cast<std::size_t>(ids_.at(std::string(kWordEnd))) + 1;
  std::vector<std::string> vocab(vocab_.begin(), vocab_.begin() + static_cast<std::ptrdiff_t>(base_end));
  std::unordered_set<std::string> present(vocab.begin(), vocab.end());
  std::vector<Merge> merges(merges_.begin(), merges_.begin() + static_cast<std::ptrdiff_t>(count));
  for (const auto& m : merges) {
    if (present.insert(m.left + m.right).second) vocab.push_back(m.left + m.right);
  }
  return BpeModel(specials_, std::move(merges), std::move(vocab));
}

std::string BpeModel::serialize() const {
  std::string out = "bpe-model v1 " + std::to_string(vocab_.size()) + "\n[specials]\n";
  for (const auto& s : specials_) out += s + "\n";
  out += "[merges]\n";
  for (const auto& m : merges_) out += m.left + "\t" + m.right + "\n";
  out += "[vocab]\n";
  for (std::size_t i = 0; i < vocab_.size(); ++i) out += vocab_[i] + "\t" + std::to_string(i) + "\n";
  return out;
}

BpeModel BpeModel::parse(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw FormatError("empty model file", 1);
  std::istringstream header(lines[0]);
  std::string magic;
  std::string version;
  std::string size_text;
  std::string extra;
  header >> magic >> version >> size_text;
  if (magic != "bpe-model" || size_text.empty() || (header >> extra)) {
    throw FormatError("expected header 'bpe-model v1 <vocab_size>'", 1);
  }
  if (version != "v1") throw FormatError("unsupported model version '" + version + "'", 1);
  std::size_t declared = 0;
  if (auto [p, ec] = std::from_chars(size_text.data(), size_text.data() + size_text.size(), declared);
      ec != std::errc() || p != size_text.data() + size_text.size()) {
    throw FormatError("invalid vocabulary size '" + size_text + "'", 1);
  }

  enum class Section { kNone, kSpecials, kMerges, kVocab } section = Section::kNone;
  std::vector<std::string> specials;
  std::vector<Merge> merges;
  std::map<std::size_t, std::string> by_id;
  std::unordered_set<std::string> tokens;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const std::size_t lineno = i + 1;
    if (line == "[specials]" && section == Section::kNone) {
      section = Section::kSpecials;
      continue;
    }
    if (line == "[merges]" && section == Section::kSpecials) {
      section = Section::kMerges;
      continue;
    }
    if (line == "[vocab]" && section == Section::kMerges) {
      section = Section::kVocab;
      continue;
    }
    const auto tab = line.find('\t');
    switch (section) {
      case Section::kNone:
        throw FormatError("content before [specials]", lineno);
      case Section::kSpecials:
        if (line.empty() || tab != std::string::npos) throw FormatError("malformed special token", lineno);
        specials.push_back(line);
        break;
      case Section::kMerges:
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
            line.find('\t', tab + 1) != std::string::npos) {
          throw FormatError("malformed merge, expected left<TAB>right", lineno);
        }
        merges.push_back(Merge{line.substr(0, tab), line.substr(tab + 1)});
        break;
      case Section::kVocab: {
        if (tab == std::string::npos || tab == 0 || line.find('\t', tab + 1) != std::string::npos) {
          throw FormatError("malformed vocabulary entry, expected token<TAB>id", lineno);
        }
        const std::string token = line.substr(0, tab);
        const std::string id_text = line.substr(tab + 1);
        std::size_t id = 0;
        auto [p, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
        if (ec != std::errc() || p != id_text.data() + id_text.size()) {
          throw FormatError("invalid token id '" + id_text + "'", lineno);
        }
        if (!tokens.insert(token).second) throw FormatError("duplicate vocabulary entry '" + token + "'", lineno);
        if (!by_id.emplace(id, token).second) throw FormatError("duplicate token id " + id_text, lineno);
        break;
      }
    }
  }
  if (section != Section::kVocab) throw FormatError("missing [specials], [merges] or [vocab] section");
  if (by_id.size() != declared) {
    throw FormatError("header declares " + std::to_string(declared) + " tokens, found " +
                      std::to_string(by_id.size()));
  }
  std::vector<std::string> vocab;
  vocab.reserve(by_id.size());
  for (const auto& [id, token] : by_id) {
    if (id != vocab.size()) throw FormatError("token ids are not dense at id " + std::to_string(vocab.size()));
    vocab.push_back(token);
  }
  return BpeModel(std::move(specials), std::move(merges), std::move(vocab));
}

void BpeModel::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

BpeModel BpeModel::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::size_t bpe_base_vocab_size(const std::vector<std::vector<std::string>>& sides,
                                const BpeTrainOptions& options) {
  const auto specials = reserved_specials(options.specials);
  const auto table = count_words(sides, specials);
  return specials.size() + alphabet_of(table, options.min_char_frequency).size() + 1;
}

BpeModel bpe_train(const std::vector<std::vector<std::string>>& sides,
                   const BpeTrainOptions& options) {
  const auto specials = reserved_specials(options.specials);
  const auto table = count_words(sides, specials);
  const auto alphabet = alphabet_of(table, std::max<std::size_t>(options.min_char_frequency, 1));

  std::vector<std::string> vocab = specials;
  for (char32_t cp : alphabet) vocab.push_back(unicode::to_utf8(cp));
  vocab.emplace_back(kWordEnd);
  {
    std::unordered_set<std::string> unique(vocab.begin(), vocab.end());
    if (unique.size() != vocab.size()) {
      throw ConfigError("a special token collides with a single character or the word-end marker");
    }
  }
  if (options.vocab_size < vocab.size()) {
    throw ConfigError("vocab_size " + std::to_string(options.vocab_size) +
                      " is too small; the minimum for this data is " + std::to_string(vocab.size()) +
                      " (" + std::to_string(specials.size()) + " specials + " +
                      std::to_string(alphabet.size()) + " characters + word-end marker)");
  }

  std::vector<Merge> merges;
  std::vector<std::string> products;
  Trainer trainer(table, alphabet, specials);
  trainer.run(options.vocab_size - vocab.size(), merges, products);
  for (auto& p : products) vocab.push_back(std::move(p));
  return BpeModel(specials, std::move(merges), std::move(vocab));
}

}  // namespace geezmt
