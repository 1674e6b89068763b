#include "geezmt/pipeline.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"

#include "geezmt/bleu.hpp"
#include "geezmt/bpe.hpp"
#include "geezmt/embedder.hpp"
#include "geezmt/error.hpp"
#include "geezmt/few_shot.hpp"
#include "geezmt/hash.hpp"
#include "geezmt/multilingual.hpp"
#include "geezmt/retrieval.hpp"
#include "geezmt/stats.hpp"
#include "geezmt/unicode.hpp"

namespace geezmt {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

template <typename T>
T get_value(const pt::ptree& section, const std::string& section_name, const std::string& key, T fallback) {
  const auto node = section.get_child_optional(pt::ptree::path_type(key, '\0'));
  if (!node) return fallback;
  const std::string text = trimmed(node->data());
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "yes" || text == "1") return true;
      if (text == "false" || text == "no" || text == "0") return false;
      throw std::invalid_argument(text);
    } else if constexpr (std::is_floating_point_v<T>) {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return static_cast<T>(v);
    } else {
      std::size_t used = 0;
      if (!text.empty() && text.front() == '-') throw std::invalid_argument(text);
      const unsigned long long v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return static_cast<T>(v);
    }
  } catch (const std::logic_error&) {
    throw ConfigError("[" + section_name + "] " + key + ": invalid value '" + text + "'");
  }
}

void check_keys(const pt::ptree& section, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : section) {
    if (!allowed.contains(key)) throw ConfigError("[" + name + "] unknown key '" + key + "'");
  }
}

std::vector<CorpusSource> parse_corpora(const std::string& section, const std::string& text) {
  std::vector<CorpusSource> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trimmed(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
      throw ConfigError("[" + section + "] corpora entry '" + item + "' must be <domain>:<file stem>");
    }
    out.push_back(CorpusSource{trimmed(item.substr(0, colon)), trimmed(item.substr(colon + 1))});
  }
  return out;
}

bool known_section(const std::string& name) {
  return name == "pipeline" || name == "split" || name == "bpe" || name == "fuzzy" ||
         name.starts_with("direction.");
}

// The INI reader drops empty sections, so headers are checked on the raw text.
std::set<std::string> section_headers(const std::string& text) {
  std::set<std::string> names;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] != '[') continue;
    const auto close = line.find(']', first);
    if (close == std::string::npos) continue;  // reported by the parser
    const std::string name = line.substr(first + 1, close - first - 1);
    if (!known_section(name)) throw ConfigError("unknown section [" + name + "]");
    names.insert(name);
  }
  return names;
}

}  // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
  PipelineConfig c = parse(read_file(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
  return c;
}

PipelineConfig PipelineConfig::parse(const std::string& text, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  PipelineConfig c;
  c.base_dir = base_dir;
  c.fuzzy_enabled = section_headers(text).contains("fuzzy");
  for (const auto& [name, section] : tree) {
    if (!section.data().empty()) throw ConfigError("key '" + name + "' outside any section");
    if (name == "pipeline") {
      check_keys(section, name, {"seed", "out_dir", "overlap_mode"});
      c.seed = get_value<std::uint64_t>(section, name, "seed", c.seed);
      c.out_dir = get_value<std::string>(section, name, "out_dir", c.out_dir.string());
      try {
        c.overlap_mode = parse_overlap_mode(get_value<std::string>(section, name, "overlap_mode", "strict"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[pipeline] ") + e.what());
      }
    } else if (name == "split") {
      check_keys(section, name, {"train", "test", "validation"});
      c.ratios.train = get_value<double>(section, name, "train", c.ratios.train);
      c.ratios.test = get_value<double>(section, name, "test", c.ratios.test);
      c.ratios.validation = get_value<double>(section, name, "validation", c.ratios.validation);
    } else if (name == "bpe") {
      check_keys(section, name, {"vocab_size", "min_char_frequency", "model", "per_direction"});
      c.vocab_size = get_value<std::size_t>(section, name, "vocab_size", c.vocab_size);
      c.min_char_frequency = get_value<std::size_t>(section, name, "min_char_frequency", c.min_char_frequency);
      c.bpe_model = get_value<std::string>(section, name, "model", c.bpe_model);
      c.bpe_per_direction = get_value<bool>(section, name, "per_direction", c.bpe_per_direction);
    } else if (name.starts_with("direction.")) {
      check_keys(section, name, {"corpora"});
      DirectionConfig d{[&] {
                          try {
                            return Direction::parse(name.substr(10));
                          } catch (const std::invalid_argument& e) {
                            throw ConfigError("[" + name + "] " + e.what());
                          }
                        }(),
                        parse_corpora(name, get_value<std::string>(section, name, "corpora", ""))};
      c.directions.push_back(std::move(d));
    } else if (name == "fuzzy") {
      check_keys(section, name,
                 {"direction", "max_matches", "endpoint", "model", "top_p", "temperature",
                  "length_multiplier", "timeout_ms", "max_retries", "parallelism", "api_key_env"});
      auto& f = c.fuzzy;
      try {
        f.direction = Direction::parse(get_value<std::string>(section, name, "direction", f.direction.str()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[fuzzy] ") + e.what());
      }
      f.max_matches = get_value<std::size_t>(section, name, "max_matches", f.max_matches);
      f.endpoint = get_value<std::string>(section, name, "endpoint", f.endpoint);
      f.model = get_value<std::string>(section, name, "model", f.model);
      f.params.top_p = get_value<double>(section, name, "top_p", f.params.top_p);
      f.params.temperature = get_value<double>(section, name, "temperature", f.params.temperature);
      f.params.length_multiplier = get_value<double>(section, name, "length_multiplier", f.params.length_multiplier);
      f.timeout_ms = get_value<int>(section, name, "timeout_ms", f.timeout_ms);
      f.max_retries = get_value<int>(section, name, "max_retries", f.max_retries);
      f.parallelism = get_value<std::size_t>(section, name, "parallelism", f.parallelism);
      f.api_key_env = get_value<std::string>(section, name, "api_key_env", f.api_key_env);
      c.fuzzy_enabled = true;
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  return c;
}

fs::path PipelineConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

fs::path PipelineConfig::bpe_model_path(std::optional<Direction> direction) const {
  const fs::path joint = out_dir / bpe_model;
  if (!direction) return joint;
  return joint.parent_path() / direction->str() / joint.filename();
}

fs::path PipelineConfig::source_file(const DirectionConfig& d, const CorpusSource& c) const {
  return resolve(c.stem.string() + "." + d.direction.source().code());
}

fs::path PipelineConfig::target_file(const DirectionConfig& d, const CorpusSource& c) const {
  return resolve(c.stem.string() + "." + d.direction.target().code());
}

void PipelineConfig::validate() const {
  try {
    ratios.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[split] ") + e.what());
  }
  if (directions.empty()) throw ConfigError("no [direction.<src>-<tgt>] sections");
  std::set<Direction> seen;
  for (const auto& d : directions) {
    if (!seen.insert(d.direction).second) throw ConfigError("direction " + d.direction.str() + " listed twice");
    if (d.corpora.empty()) throw ConfigError("[direction." + d.direction.str() + "] has no corpora");
    std::set<std::string> domains;
    for (const auto& c : d.corpora) {
      if (!domains.insert(c.domain).second) {
        throw ConfigError("[direction." + d.direction.str() + "] domain '" + c.domain + "' listed twice");
      }
      if (c.domain.find_first_of("/\\ \t") != std::string::npos) {
        throw ConfigError("domain name '" + c.domain + "' must not contain slashes or spaces");
      }
      for (const auto& f : {source_file(d, c), target_file(d, c)}) {
        if (!fs::is_regular_file(f)) throw ConfigError("corpus file not found: " + f.string());
      }
    }
  }
  if (vocab_size == 0) throw ConfigError("[bpe] vocab_size must be positive");
  if (fuzzy_enabled) {
    if (!seen.contains(fuzzy.direction)) {
      throw ConfigError("[fuzzy] direction " + fuzzy.direction.str() + " is not a configured direction");
    }
    if (fuzzy.max_matches < 1 || fuzzy.max_matches > kMaxMatches) {
      throw ConfigError("[fuzzy] max_matches must be between 1 and " + std::to_string(kMaxMatches));
    }
    if (fuzzy.parallelism < 1) throw ConfigError("[fuzzy] parallelism must be at least 1");
    if (!fuzzy.endpoint.empty()) parse_url(fuzzy.endpoint);
  }
}

// ---------------------------------------------------------------------------
// Commands

namespace {

// Collects a stage's inputs and outputs and writes its manifest.
class Stage {
public:
  Stage(const PipelineConfig& config, std::string name)
      : config_(config), name_(std::move(name)), dir_(config.out_dir / name_) {
    fs::create_directories(dir_);
  }

  const fs::path& dir() const noexcept { return dir_; }

  void input(const fs::path& path) { inputs_[label(path)] = sha256_file(path); }

  void write(const fs::path& relative, std::string_view contents) {
    write_file(dir_ / relative, contents);
    outputs_.insert(relative.generic_string());
  }

  void write_lines(const fs::path& relative, const std::vector<std::string>& lines) {
    std::string buffer;
    for (const auto& l : lines) {
      buffer += l;
      buffer += '\n';
    }
    write(relative, buffer);
  }

  nlohmann::json& params() { return params_; }

  void finish() {
    nlohmann::json outputs = nlohmann::json::object();
    for (const auto& rel : outputs_) outputs[rel] = sha256_file(dir_ / rel);
    nlohmann::json manifest{{"command", name_},
                            {"tool", kToolVersion},
                            {"seed", config_.seed},
                            {"params", params_},
                            {"inputs", inputs_},
                            {"outputs", outputs}};
    write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

private:
  // Inputs under out_dir are recorded relative to it so manifests do not
  // depend on where the output tree lives.
  std::string label(const fs::path& path) const {
    const auto rel = path.lexically_normal().lexically_relative(config_.out_dir.lexically_normal());
    if (!rel.empty() && *rel.begin() != "..") return "$OUT/" + rel.generic_string();
    return path.lexically_normal().generic_string();
  }

  const PipelineConfig& config_;
  std::string name_;
  fs::path dir_;
  std::map<std::string, std::string> inputs_;
  std::set<std::string> outputs_;
  nlohmann::json params_ = nlohmann::json::object();
};

constexpr std::array<std::string_view, 3> kSplitNames = {"train", "test", "validation"};

struct DirectionCorpus {
  Corpus corpus;
  std::size_t dropped = 0;
};

DirectionCorpus ingest_direction(const PipelineConfig& config, const DirectionConfig& d, Stage& stage) {
  std::vector<SentencePair> pairs;
  std::size_t dropped = 0;
  for (const auto& c : d.corpora) {
    const auto src = config.source_file(d, c);
    const auto tgt = config.target_file(d, c);
    stage.input(src);
    stage.input(tgt);
    auto result = ingest_parallel(src, tgt, d.direction, c.domain);
    dropped += result.dropped_lines;
    pairs.insert(pairs.end(), result.corpus.begin(), result.corpus.end());
  }
  return DirectionCorpus{Corpus(d.direction, std::move(pairs)), dropped};
}

std::vector<std::string> sources_of(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& p : c) out.push_back(p.source_text);
  return out;
}

std::vector<std::string> targets_of(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& p : c) out.push_back(p.target_text);
  return out;
}

const Corpus& part(const SplitBundle& b, std::size_t i) {
  return i == 0 ? b.train : (i == 1 ? b.test : b.validation);
}

fs::path split_dir(const PipelineConfig& config, const Direction& d) {
  return config.out_dir / "split" / d.str();
}

std::vector<std::string> read_lines(const fs::path& path) { return split_lines(read_file(path)); }

void set_common_params(const PipelineConfig& config, Stage& stage) {
  stage.params()["ratios"] = {config.ratios.train, config.ratios.test, config.ratios.validation};
  stage.params()["overlap_mode"] = std::string(to_string(config.overlap_mode));
}

}  // namespace

std::vector<std::string> cmd_ingest(const PipelineConfig& config) {
  config.validate();
  Stage stage(config, "ingest");
  std::vector<std::string> summary;
  for (const auto& d : config.directions) {
    for (const auto& c : d.corpora) {
      const auto src = config.source_file(d, c);
      const auto tgt = config.target_file(d, c);
      stage.input(src);
      stage.input(tgt);
      const auto result = ingest_parallel(src, tgt, d.direction, c.domain);
      const fs::path base = fs::path(d.direction.str()) / c.domain;
      stage.write_lines(base.string() + "." + d.direction.source().code(), sources_of(result.corpus));
      stage.write_lines(base.string() + "." + d.direction.target().code(), targets_of(result.corpus));
      summary.push_back(d.direction.str() + " " + c.domain + ": " + std::to_string(result.corpus.size()) +
                        " pairs, " + std::to_string(result.dropped_lines) + " dropped blank line(s)");
    }
  }
  stage.finish();
  return summary;
}

std::vector<std::string> cmd_split(const PipelineConfig& config) {
  config.validate();
  Stage stage(config, "split");
  set_common_params(config, stage);
  std::vector<std::string> summary;
  std::vector<std::string> blocking;
  for (const auto& d : config.directions) {
    const auto ingested = ingest_direction(config, d, stage);
    SplitOptions options;
    options.ratios = config.ratios;
    options.seed = config.seed;
    options.mode = config.overlap_mode;
    const SplitBundle bundle = split_stratified(ingested.corpus, options);
    const auto violations = verify_bundle(bundle);

    const std::string dir = d.direction.str();
    const std::string src = d.direction.source().code();
    const std::string tgt = d.direction.target().code();
    for (std::size_t s = 0; s < kSplitNames.size(); ++s) {
      const Corpus& c = part(bundle, s);
      stage.write_lines(dir + "/" + std::string(kSplitNames[s]) + "." + src, sources_of(c));
      stage.write_lines(dir + "/" + std::string(kSplitNames[s]) + "." + tgt, targets_of(c));
      for (const auto& [domain, _] : bundle.report.domains) {
        std::vector<std::string> ss;
        std::vector<std::string> ts;
        for (const auto& p : c) {
          if (p.domain != domain) continue;
          ss.push_back(p.source_text);
          ts.push_back(p.target_text);
        }
        const std::string base = dir + "/" + domain + "/" + std::string(kSplitNames[s]);
        stage.write_lines(base + "." + src, ss);
        stage.write_lines(base + "." + tgt, ts);
      }
    }
    const SplitBundle* one = &bundle;
    stage.write(dir + "/report.tsv", stats_report(std::span<const SplitBundle>(one, 1)).to_tsv());

    std::vector<std::string> notes;
    notes.push_back("blank_lines_dropped=" + std::to_string(ingested.dropped));
    notes.push_back("duplicates_removed=" + std::to_string(bundle.report.duplicates_removed));
    notes.push_back("validation_moved_to_test=" + std::to_string(bundle.report.eval_reassigned));
    notes.push_back("train_pruned_for_overlap=" + std::to_string(bundle.report.pruned));
    notes.push_back("eval_moved_to_train=" + std::to_string(bundle.report.rebalanced));
    for (const auto& w : bundle.report.warnings) notes.push_back("warning: " + w);
    for (const auto& v : violations) {
      std::string line = "violation " + std::string(to_string(v.rule)) + ": " + v.detail;
      if (!v.key.empty()) line += " key=" + v.key;
      for (const auto& o : v.origins) line += " " + o;
      notes.push_back(line);
      if (v.rule != Rule::kRatio) blocking.push_back(dir + " " + line);
    }
    stage.write_lines(dir + "/verify.txt", notes);

    const auto t = bundle.report.total();
    summary.push_back(dir + ": " + std::to_string(ingested.corpus.size()) + " pairs -> train " +
                      std::to_string(t.train) + ", test " + std::to_string(t.test) + ", validation " +
                      std::to_string(t.validation) + " (" + std::to_string(violations.size()) +
                      " violation(s))");
  }
  stage.finish();
  if (!blocking.empty()) throw Error("verify", blocking.front());
  return summary;
}

SplitBundle load_split(const PipelineConfig& config, const Direction& direction) {
  const fs::path dir = split_dir(config, direction);
  const auto table = StatsTable::from_tsv(read_file(dir / "report.tsv"));
  SplitReport report;
  std::array<std::vector<SentencePair>, 3> parts;
  for (const auto& row : table.rows()) {
    DomainCounts& c = report.domains[row.domain];
    c.original = row.original;
    c.after_dedup = row.after_dedup;
    c.train = row.train;
    c.test = row.test;
    c.validation = row.validation;
    for (std::size_t s = 0; s < kSplitNames.size(); ++s) {
      const fs::path base = dir / row.domain / kSplitNames[s];
      const fs::path src = base.string() + "." + direction.source().code();
      const fs::path tgt = base.string() + "." + direction.target().code();
      const auto ss = read_lines(src);
      const auto ts = read_lines(tgt);
      if (ss.size() != ts.size()) throw AlignmentError(ss.size(), ts.size());
      for (std::size_t i = 0; i < ss.size(); ++i) {
        parts[s].push_back(SentencePair{ss[i], ts[i], direction, row.domain,
                                        src.generic_string() + ":" + std::to_string(i + 1)});
      }
    }
  }
  return SplitBundle{Corpus(direction, std::move(parts[0])), Corpus(direction, std::move(parts[1])),
                     Corpus(direction, std::move(parts[2])), std::move(report), config.ratios,
                     config.overlap_mode};
}

std::vector<std::string> cmd_stats(const PipelineConfig& config) {
  config.validate();
  Stage stage(config, "stats");
  StatsTable table;
  for (const auto& d : config.directions) {
    const fs::path report = split_dir(config, d.direction) / "report.tsv";
    if (!fs::exists(report)) throw Error("missing-input", report.string() + " not found; run split first");
    stage.input(report);
    const auto part = StatsTable::from_tsv(read_file(report));
    for (const auto& row : part.rows()) table.add_row(row);
  }
  const std::string text = table.to_text();
  stage.write("stats.tsv", table.to_tsv());
  stage.write("stats.txt", text);
  stage.finish();
  return split_lines(text);
}

std::vector<std::string> cmd_tag(const PipelineConfig& config) {
  config.validate();
  Stage stage(config, "multilingual");
  std::vector<SplitBundle> bundles;
  for (const auto& d : config.directions) {
    for (std::size_t s = 0; s < kSplitNames.size(); ++s) {
      const fs::path base = split_dir(config, d.direction) / kSplitNames[s];
      stage.input(base.string() + "." + d.direction.source().code());
      stage.input(base.string() + "." + d.direction.target().code());
    }
    bundles.push_back(load_split(config, d.direction));
  }
  const MultilingualBundle ml = assemble_multilingual(bundles);
  auto emit = [&](const std::string& name, const std::vector<SentencePair>& pairs) {
    std::vector<std::string> src;
    std::vector<std::string> tgt;
    std::vector<std::string> dirs;
    for (const auto& p : pairs) {
      src.push_back(p.source_text);
      tgt.push_back(p.target_text);
      dirs.push_back(p.direction.str());
    }
    stage.write_lines(name + ".src", src);
    stage.write_lines(name + ".tgt", tgt);
    stage.write_lines(name + ".dir", dirs);
  };
  emit("train", ml.train);
  emit("test", ml.test);
  emit("validation", ml.validation);
  for (const auto& d : ml.directions) emit("test/" + d.str(), ml.test_for(d));
  stage.finish();
  return {"multilingual: train " + std::to_string(ml.train.size()) + ", test " + std::to_string(ml.test.size()) +
          ", validation " + std::to_string(ml.validation.size()) + " across " +
          std::to_string(ml.directions.size()) + " direction(s)"};
}

std::vector<std::string> cmd_bpe_train(const PipelineConfig& config) {
  config.validate();
  Stage stage(config, "bpe");
  BpeTrainOptions options;
  options.vocab_size = config.vocab_size;
  options.min_char_frequency = config.min_char_frequency;

  // One model over the pooled train sides of the given directions.
  std::vector<std::string> summary;
  auto train = [&](const std::vector<const DirectionConfig*>& group, const fs::path& model_path) {
    std::vector<std::vector<std::string>> sides;
    std::set<std::string> tags;
    for (const auto* d : group) {
      const fs::path base = split_dir(config, d->direction) / "train";
      for (const auto& lang : {d->direction.source(), d->direction.target()}) {
        const fs::path file = base.string() + "." + lang.code();
        stage.input(file);
        sides.push_back(read_lines(file));
      }
      tags.insert(TargetTag(d->direction.target()).str());
    }
    options.specials.assign(tags.begin(), tags.end());
    const BpeModel model = bpe_train(sides, options);
    write_file(model_path, model.serialize());
    const std::string rel = fs::relative(model_path, config.out_dir).generic_string();
    stage.params()["models"][rel] = sha256_file(model_path);
    summary.push_back("bpe: " + std::to_string(model.merges().size()) + " merges, vocabulary " +
                      std::to_string(model.vocab_size()) + " -> " + model_path.generic_string());
  };

  if (config.bpe_per_direction) {
    for (const auto& d : config.directions) train({&d}, config.bpe_model_path(d.direction));
  } else {
    std::vector<const DirectionConfig*> all;
    for (const auto& d : config.directions) all.push_back(&d);
    train(all, config.bpe_model_path());
  }
  stage.params()["vocab_size"] = config.vocab_size;
  stage.params()["min_char_frequency"] = config.min_char_frequency;
  stage.params()["per_direction"] = config.bpe_per_direction;
  stage.finish();
  return summary;
}

std::vector<std::string> cmd_bpe_apply(const PipelineConfig& config) {
  config.validate();
  Stage stage(config, "bpe-apply");
  std::map<std::string, BpeModel> models;  // keyed by direction; "" for the joint model
  auto model_for = [&](const std::string& direction) -> const BpeModel& {
    const std::string key = config.bpe_per_direction ? direction : "";
    auto it = models.find(key);
    if (it == models.end()) {
      const fs::path path = config.bpe_per_direction ? config.bpe_model_path(Direction::parse(key))
                                                     : config.bpe_model_path();
      stage.input(path);
      it = models.emplace(key, BpeModel::load(path)).first;
    }
    return it->second;
  };

  std::size_t lines = 0;
  std::size_t mismatches = 0;
  // `directions` names the direction of each input line.
  auto segment = [&](const fs::path& in, const std::string& out_rel, const std::vector<std::string>& directions) {
    stage.input(in);
    const auto input = read_lines(in);
    if (input.size() != directions.size()) throw FormatError(in.generic_string() + ": direction metadata mismatch");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < input.size(); ++i) {
      const std::string& line = input[i];
      const BpeModel& model = model_for(directions[i]);
      const auto tokens = model.encode(line);
      std::string joined;
      bool unknown = false;
      for (const auto& t : tokens) {
        if (!joined.empty()) joined += ' ';
        joined += t;
        unknown = unknown || t == kUnknownToken;
      }
      if (!unknown) {
        std::string normalized;
        for (const auto& w : unicode::split_whitespace(line)) normalized += (normalized.empty() ? "" : " ") + w;
        if (model.decode(tokens) != normalized) ++mismatches;
      }
      ++lines;
      out.push_back(std::move(joined));
    }
    stage.write_lines(out_rel, out);
  };

  for (const auto& d : config.directions) {
    for (const auto& split : kSplitNames) {
      for (const auto& lang : {d.direction.source(), d.direction.target()}) {
        const std::string name = std::string(split) + "." + lang.code();
        const fs::path in = split_dir(config, d.direction) / name;
        segment(in, d.direction.str() + "/" + name,
                std::vector<std::string>(read_lines(in).size(), d.direction.str()));
      }
    }
  }
  const fs::path ml = config.out_dir / "multilingual";
  if (fs::exists(ml / "train.src")) {
    for (const auto& split : kSplitNames) {
      const fs::path dirs = ml / (std::string(split) + ".dir");
      stage.input(dirs);
      const auto directions = read_lines(dirs);
      for (const char* side : {".src", ".tgt"}) {
        const std::string name = std::string(split) + side;
        segment(ml / name, "multilingual/" + name, directions);
      }
    }
  }
  stage.finish();
  if (mismatches != 0) {
    throw Error("bpe", std::to_string(mismatches) + " line(s) failed the decode(encode(x)) round trip");
  }
  return {"bpe-apply: segmented " + std::to_string(lines) + " line(s); round trip exact"};
}

std::vector<std::string> cmd_bleu(const fs::path& hyp_path, const fs::path& ref_path,
                                  const BleuCommandOptions& options) {
  const auto hyps = read_lines(hyp_path);
  const auto refs = read_lines(ref_path);
  std::vector<std::string> out;
  auto emit = [&](bool smooth) {
    const auto report = bleu_corpus(hyps, refs, BleuOptions{smooth});
    out.push_back(report.summary());
    for (const auto& kv : split_lines(report.key_values())) out.push_back(kv);
  };
  if (options.both) {
    emit(false);
    emit(true);
  } else {
    emit(options.smooth);
  }
  return out;
}

namespace {

struct FuzzySetup {
  std::shared_ptr<const Embedder> embedder;
  std::unique_ptr<RetrievalIndex> index;
};

FuzzySetup prepare_fuzzy(const PipelineConfig& config, Stage& stage) {
  if (!config.fuzzy_enabled) throw ConfigError("retrieval needs a [fuzzy] section");
  const Direction& d = config.fuzzy.direction;
  const fs::path base = split_dir(config, d) / "train";
  stage.input(base.string() + "." + d.source().code());
  stage.input(base.string() + "." + d.target().code());
  const SplitBundle bundle = load_split(config, d);
  const auto sources = sources_of(bundle.train);
  auto embedder = std::make_shared<const HashedTfidfEmbedder>(HashedTfidfEmbedder::fit(sources));
  auto index = std::make_unique<RetrievalIndex>(build_index(bundle.train, embedder));
  stage.params()["direction"] = d.str();
  stage.params()["embedder"] = embedder->identity().str();
  stage.params()["max_matches"] = config.fuzzy.max_matches;
  return FuzzySetup{std::move(embedder), std::move(index)};
}

std::vector<std::string> read_queries(const fs::path& input) {
  std::vector<std::string> out;
  std::string contents = read_file(input);
  if (const auto bad = unicode::find_invalid_utf8(contents); bad != std::string::npos) {
    throw DecodeError(input.string(), bad);
  }
  for (const auto& line : split_lines(contents)) out.push_back(unicode::trim(unicode::nfc(line)));
  return out;
}

std::string format_similarity(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", s);
  return buf;
}

}  // namespace

std::vector<std::string> cmd_retrieve(const PipelineConfig& config, const fs::path& input) {
  config.validate();
  Stage stage(config, "fuzzy-retrieve");
  auto setup = prepare_fuzzy(config, stage);
  stage.input(input);
  const auto queries = read_queries(input);
  setup.index->save(stage.dir() / "index.jsonl");
  stage.write("index.jsonl", read_file(stage.dir() / "index.jsonl"));

  std::vector<std::string> rows{"query\trank\tsimilarity\tsource\ttarget"};
  for (std::size_t q = 0; q < queries.size(); ++q) {
    if (queries[q].empty()) continue;
    const auto matches = retrieve(*setup.index, queries[q], config.fuzzy.max_matches);
    for (std::size_t r = 0; r < matches.size(); ++r) {
      rows.push_back(std::to_string(q + 1) + "\t" + std::to_string(r + 1) + "\t" +
                     format_similarity(matches[r].similarity) + "\t" + matches[r].source + "\t" +
                     matches[r].target);
    }
  }
  stage.write_lines("matches.tsv", rows);
  stage.finish();
  return {"retrieve: " + std::to_string(queries.size()) + " quer(ies) against " +
          std::to_string(setup.index->size()) + " indexed sentence(s)"};
}

std::vector<std::string> cmd_translate(const PipelineConfig& config, const fs::path& input) {
  config.validate();
  if (config.fuzzy.endpoint.empty()) throw ConfigError("[fuzzy] endpoint is required for translate");
  Stage stage(config, "fuzzy-translate");
  auto setup = prepare_fuzzy(config, stage);
  stage.input(input);
  const auto queries = read_queries(input);

  HttpBackendOptions http;
  http.endpoint = config.fuzzy.endpoint;
  http.timeout_ms = config.fuzzy.timeout_ms;
  http.max_retries = config.fuzzy.max_retries;
  if (const char* key = std::getenv(config.fuzzy.api_key_env.c_str())) http.api_key = key;
  HttpCompletionBackend backend(http);

  FewShotConfig fs_config;
  fs_config.source_lang = config.fuzzy.direction.source();
  fs_config.target_lang = config.fuzzy.direction.target();
  fs_config.model = config.fuzzy.model;
  fs_config.params = config.fuzzy.params;
  fs_config.max_matches = config.fuzzy.max_matches;
  stage.params()["model"] = fs_config.model;
  stage.params()["top_p"] = fs_config.params.top_p;
  stage.params()["temperature"] = fs_config.params.temperature;
  stage.params()["length_multiplier"] = fs_config.params.length_multiplier;
  stage.params()["prompt_template"] = std::string(kPromptTemplateVersion);

  std::vector<std::string> nonblank;
  for (const auto& q : queries) {
    if (!q.empty()) nonblank.push_back(q);
  }
  const auto results = translate_batch(*setup.index, backend, nonblank, fs_config, config.fuzzy.parallelism);

  std::vector<std::string> translations;
  std::vector<std::string> audit;
  std::size_t next = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    if (queries[q].empty()) {
      translations.emplace_back();
      continue;
    }
    const auto& r = results[next++];
    translations.push_back(r.translation);
    audit.push_back(nlohmann::json{{"line", q + 1},
                                   {"query", queries[q]},
                                   {"prompt", r.prompt},
                                   {"request", nlohmann::json::parse(r.request.to_json())},
                                   {"translation", r.translation}}
                        .dump());
  }
  stage.write_lines("translations.txt", translations);
  stage.write_lines("prompts.jsonl", audit);
  stage.finish();
  return {"translate: " + std::to_string(results.size()) + " sentence(s) translated"};
}

}  // namespace geezmt
