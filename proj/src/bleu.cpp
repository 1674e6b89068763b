#include "geezmt/bleu.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "geezmt/error.hpp"
#include "geezmt/unicode.hpp"

namespace geezmt {

std::vector<std::string> eval_tokenize(std::string_view text) {
  std::u32string spaced;
  for (char32_t cp : unicode::to_u32(unicode::nfc(text))) {
    if (unicode::is_punctuation(cp)) {
      spaced += U' ';
      spaced += cp;
      spaced += U' ';
    } else {
      spaced += cp;
    }
  }
  return unicode::split_whitespace(unicode::to_utf8(spaced));
}

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

// n-grams keyed by their tokens joined with U+0001, which no token holds.
NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t j = 1; j < n; ++j) {
      key += '\x01';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

BleuReport bleu_corpus(const std::vector<std::string>& hypotheses,
                       const std::vector<std::string>& references, const BleuOptions& options) {
  if (hypotheses.size() != references.size()) {
    throw Error("bleu", "hypothesis count " + std::to_string(hypotheses.size()) +
                            " does not match reference count " + std::to_string(references.size()));
  }
  if (hypotheses.empty()) throw Error("bleu", "no sentences to score");

  BleuReport r;
  r.smoothed = options.smooth;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto hyp = eval_tokenize(hypotheses[s]);
    const auto ref = eval_tokenize(references[s]);
    r.hyp_length += hyp.size();
    r.ref_length += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto h = count_ngrams(hyp, n);
      const auto g = count_ngrams(ref, n);
      for (const auto& [gram, c] : h) {
        r.totals[n - 1] += c;
        if (auto it = g.find(gram); it != g.end()) r.matches[n - 1] += std::min(c, it->second);
      }
    }
  }

  double log_sum = 0.0;
  bool any_zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    double p = r.totals[n] == 0 ? 0.0
                                : static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]);
    if (options.smooth && r.matches[n] == 0) p = 1.0 / static_cast<double>(r.totals[n] + 1);
    r.precisions[n] = p;
    if (p <= 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(p);
    }
  }

  if (r.hyp_length == 0) {
    r.brevity_penalty = 0.0;
  } else if (r.hyp_length > r.ref_length) {
    r.brevity_penalty = 1.0;
  } else {
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length));
  }

  if (any_zero || r.hyp_length == 0) {
    r.score = 0.0;
  } else {
    r.score = 100.0 * r.brevity_penalty * std::exp(log_sum / 4.0);
  }
  return r;
}

std::string BleuReport::summary() const {
  const double ratio = ref_length == 0 ? 0.0 : static_cast<double>(hyp_length) / static_cast<double>(ref_length);
  std::string out = "BLEU = " + fixed(score, 2) + " ";
  for (std::size_t n = 0; n < 4; ++n) out += (n ? "/" : "") + fixed(100.0 * precisions[n], 1);
  out += " (BP = " + fixed(brevity_penalty, 3) + " ratio = " + fixed(ratio, 3) +
         " hyp_len = " + std::to_string(hyp_length) + " ref_len = " + std::to_string(ref_length) + ")";
  if (smoothed) out += " smooth = add-one";
  return out;
}

std::string BleuReport::key_values() const {
  std::ostringstream out;
  out.precision(17);
  out << "score=" << score << '\n';
  for (std::size_t n = 0; n < 4; ++n) out << "precision_" << n + 1 << '=' << precisions[n] << '\n';
  for (std::size_t n = 0; n < 4; ++n) {
    out << "matches_" << n + 1 << '=' << matches[n] << '\n';
    out << "totals_" << n + 1 << '=' << totals[n] << '\n';
  }
  out << "brevity_penalty=" << brevity_penalty << '\n'
      << "hyp_length=" << hyp_length << '\n'
      << "ref_length=" << ref_length << '\n'
      << "smoothing=" << (smoothed ? "add-one" : "none") << '\n';
  return out.str();
}

std::map<Direction, BleuReport> bleu_by_direction(
    const MultilingualBundle& bundle, const std::map<Direction, std::vector<std::string>>& hypotheses,
    const BleuOptions& options) {
  std::string missing;
  for (const auto& d : bundle.directions) {
    if (!hypotheses.contains(d)) missing += (missing.empty() ? "" : ", ") + d.str();
  }
  if (!missing.empty()) throw Error("bleu", "missing hypotheses for direction(s): " + missing);

  std::map<Direction, BleuReport> out;
  for (const auto& d : bundle.directions) {
    std::vector<std::string> refs;
    for (const auto& p : bundle.test_for(d)) refs.push_back(p.target_text);
    const auto& hyps = hypotheses.at(d);
    if (hyps.size() != refs.size()) {
      throw Error("bleu", d.str() + ": " + std::to_string(hyps.size()) + " hypotheses for " +
                              std::to_string(refs.size()) + " test references");
    }
    out.emplace(d, bleu_corpus(hyps, refs, options));
  }
  return out;
}

}  // namespace geezmt
