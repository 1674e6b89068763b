// geezmt: corpus preparation, scoring and fuzzy-match translation.
//
//   geezmt --config run.ini split
//   geezmt bleu --hyp out.txt --ref ref.txt --both
//
// Errors go to stderr as one JSON object per line: {"error": kind, "message": ...}.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "geezmt/error.hpp"
#include "geezmt/pipeline.hpp"

namespace {

int report_error(const std::string& kind, const std::string& message, int code = 1) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-resource MT corpus toolkit", "geezmt"};
  app.set_version_flag("--version", std::string(geezmt::kToolVersion));
  app.require_subcommand(1);

  std::string config_path = "geezmt.ini";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "Pipeline config file (INI)");
  app.add_option("--seed", seed, "Override the split seed");
  app.add_option("--out-dir", out_dir, "Override the output directory");

  auto* ingest = app.add_subcommand("ingest", "Read and normalize the parallel files");
  auto* split = app.add_subcommand("split", "Deduplicate, split and verify");
  auto* stats = app.add_subcommand("stats", "Per-domain count table");
  auto* bpe_train = app.add_subcommand("bpe-train", "Train the shared BPE model");
  auto* bpe_apply = app.add_subcommand("bpe-apply", "Segment every split with the BPE model");
  auto* tag = app.add_subcommand("tag", "Tag sources and build the multilingual corpus");

  auto* bleu = app.add_subcommand("bleu", "Corpus BLEU of a hypothesis file");
  std::string hyp;
  std::string ref;
  geezmt::BleuCommandOptions bleu_options;
  bleu->add_option("--hyp", hyp, "Hypotheses, one per line")->required();
  bleu->add_option("--ref", ref, "References, one per line")->required();
  bleu->add_flag("--smooth", bleu_options.smooth, "Add-one smoothing on zero-match orders");
  bleu->add_flag("--both", bleu_options.both, "Print unsmoothed and smoothed scores");

  std::string input;
  auto* retrieve = app.add_subcommand("retrieve", "Top fuzzy matches for each input line");
  retrieve->add_option("--input", input, "Query sentences, one per line")->required();
  auto* translate = app.add_subcommand("translate", "Few-shot translation through the completion backend");
  translate->add_option("--input", input, "Source sentences, one per line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  try {
    std::vector<std::string> lines;
    if (bleu->parsed()) {
      lines = geezmt::cmd_bleu(hyp, ref, bleu_options);
    } else {
      auto config = geezmt::PipelineConfig::load(config_path);
      if (seed) config.seed = *seed;
      if (out_dir) config.out_dir = *out_dir;
      if (ingest->parsed()) lines = geezmt::cmd_ingest(config);
      else if (split->parsed()) lines = geezmt::cmd_split(config);
      else if (stats->parsed()) lines = geezmt::cmd_stats(config);
      else if (bpe_train->parsed()) lines = geezmt::cmd_bpe_train(config);
      else if (bpe_apply->parsed()) lines = geezmt::cmd_bpe_apply(config);
      else if (tag->parsed()) lines = geezmt::cmd_tag(config);
      else if (retrieve->parsed()) lines = geezmt::cmd_retrieve(config, input);
      else if (translate->parsed()) lines = geezmt::cmd_translate(config, input);
    }
    for (const auto& line : lines) std::cout << line << '\n';
  } catch (const geezmt::Error& e) {
    return report_error(e.kind(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("io", e.what());
  } catch (const std::invalid_argument& e) {
    return report_error("invalid-argument", e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
