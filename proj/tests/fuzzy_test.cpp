#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "geezmt/backend.hpp"
#include "geezmt/bleu.hpp"
#include "geezmt/embedder.hpp"
#include "geezmt/error.hpp"
#include "geezmt/few_shot.hpp"
#include "geezmt/mock_backend.hpp"
#include "geezmt/prompt.hpp"
#include "geezmt/retrieval.hpp"
#include "support.hpp"

namespace geezmt {
namespace {

using testing::Gen;
using Mode = MockCompletionServer::Mode;

const Direction kGezEn(LanguageTag("gez"), LanguageTag("en"));

Corpus random_corpus(std::uint64_t seed, std::size_t n) {
  Gen g(seed);
  std::vector<SentencePair> pairs;
  std::set<std::string> seen;
  while (pairs.size() < n) {
    std::string src = g.sentence(true, 2, 8);
    if (!seen.insert(src).second) continue;
    pairs.push_back(SentencePair{src, g.sentence(false, 2, 8), kGezEn, "d", ""});
  }
  return Corpus(kGezEn, pairs);
}

std::shared_ptr<const Embedder> fitted(const Corpus& c) {
  std::vector<std::string> docs;
  for (const auto& p : c) docs.push_back(p.source_text);
  return std::make_shared<const HashedTfidfEmbedder>(HashedTfidfEmbedder::fit(docs));
}

std::vector<double> dense(const SparseVector& v, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < v.indices.size(); ++i) out[v.indices[i]] = v.values[i];
  return out;
}

TEST(Embedder, UnitNormAndDeterministic) {
  const HashedTfidfEmbedder e;
  Gen g(1);
  for (int i = 0; i < 100; ++i) {
    const std::string s = g.mixed_sentence();
    const auto v = e.embed(s);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    EXPECT_EQ(v, e.embed(s));
    EXPECT_TRUE(std::is_sorted(v.indices.begin(), v.indices.end()));
    for (double x : v.values) EXPECT_GT(x, 0.0);
  }
  EXPECT_TRUE(e.embed("   ").indices.empty());
  EXPECT_NEAR(e.embed("ሀ").norm(), 1.0, 1e-12);  // padding gives single characters n-grams
}

TEST(Embedder, NormalizesCaseSpacingAndForm) {
  const HashedTfidfEmbedder e;
  EXPECT_EQ(e.embed("Good  Morning"), e.embed("good morning"));
  EXPECT_EQ(e.embed("Cafe\xCC\x81"), e.embed("caf\xC3\xA9"));
}

TEST(Embedder, MatchesHandWeighting) {
  const std::vector<std::string> docs{"ab", "abc", "xyz"};
  const auto e = HashedTfidfEmbedder::fit(docs, TfidfOptions{64, 2, 3});
  const auto v = e.embed("ab");
  // " ab " yields " a", "ab", "b ", " ab", "ab " -> tf 1 each (modulo bucket
  // collisions), weighted by idf, then normalized.
  std::vector<double> expected(64, 0.0);
  for (const auto& [b, c] : e.term_counts("ab")) expected[b] = c * e.idf()[b];
  double norm = 0.0;
  for (double x : expected) norm += x * x;
  norm = std::sqrt(norm);
  const auto got = dense(v, 64);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(got[i], expected[i] / norm, 1e-15);
  double total = 0;
  for (const auto& [_, c] : e.term_counts("ab")) total += c;
  EXPECT_EQ(total, 5.0);
  // idf for a bucket seen in 2 of 3 documents.
  const auto first = e.term_counts("ab").front().first;
  EXPECT_GE(e.idf()[first], 1.0);
}

TEST(Embedder, IdentityTracksFit) {
  const auto a = HashedTfidfEmbedder::fit(std::vector<std::string>{"one", "two"});
  const auto b = HashedTfidfEmbedder::fit(std::vector<std::string>{"one", "three"});
  const auto a2 = HashedTfidfEmbedder::fit(std::vector<std::string>{"one", "two"});
  EXPECT_EQ(a.identity(), a2.identity());
  EXPECT_NE(a.identity(), b.identity());
  EXPECT_EQ(a.identity().name, "char-ngram-tfidf");
  EXPECT_EQ(a.dimension(), 4096u);
}

TEST(Retrieval, EmptyAndSizedIndexes) {
  const Corpus empty(kGezEn);
  const auto idx = build_index(empty, std::make_shared<const HashedTfidfEmbedder>());
  EXPECT_EQ(idx.size(), 0u);
  EXPECT_TRUE(retrieve(idx, "ሰላም", 10).empty());

  const auto c = random_corpus(2, 500);
  const auto big = build_index(c, fitted(c));
  ASSERT_EQ(big.size(), 500u);
  for (const auto& e : big.entries()) EXPECT_NEAR(e.vector.norm(), 1.0, 1e-12);
  const auto again = build_index(c, fitted(c));
  for (std::size_t i = 0; i < 500; ++i) EXPECT_EQ(again.entries()[i].vector, big.entries()[i].vector);
}

TEST(Retrieval, KBoundsAndSmallIndex) {
  const auto c = random_corpus(3, 3);
  const auto idx = build_index(c, fitted(c));
  EXPECT_EQ(retrieve(idx, c[0].source_text, 10).size(), 3u);
  EXPECT_THROW(retrieve(idx, "x", 0), std::invalid_argument);
  EXPECT_THROW(retrieve(idx, "x", 11), std::invalid_argument);
}

TEST(Retrieval, SelfQueryRanksFirst) {
  const auto c = random_corpus(4, 200);
  const auto idx = build_index(c, fitted(c));
  for (std::size_t i = 0; i < c.size(); i += 7) {
    const auto m = retrieve(idx, c[i].source_text, 5);
    ASSERT_FALSE(m.empty());
    EXPECT_EQ(m[0].position, i);
    EXPECT_NEAR(m[0].similarity, 1.0, 1e-12);
    for (const auto& x : m) {
      EXPECT_GE(x.similarity, 0.0);
      EXPECT_LE(x.similarity, 1.0 + 1e-12);
    }
  }
}

TEST(Retrieval, MatchesBruteForceDenseScan) {
  const auto c = random_corpus(5, 500);
  const auto embedder = fitted(c);
  const auto idx = build_index(c, embedder);
  std::vector<std::vector<double>> vectors;
  for (const auto& p : c) vectors.push_back(dense(embedder->embed(p.source_text), 4096));
  Gen g(6);
  for (int q = 0; q < 50; ++q) {
    const std::string query = g.chance(0.3) ? c[g.below(c.size())].source_text : g.sentence(true, 2, 8);
    const auto qv = dense(embedder->embed(query), 4096);
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      double dot = 0;
      for (std::size_t d = 0; d < 4096; ++d) dot += qv[d] * vectors[i][d];
      all.emplace_back(dot, i);
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const auto got = retrieve(idx, query, 10);
    ASSERT_EQ(got.size(), 10u);
    for (std::size_t r = 0; r < 10; ++r) {
      EXPECT_EQ(got[r].position, all[r].second) << "query " << q << " rank " << r;
      EXPECT_NEAR(got[r].similarity, all[r].first, 1e-9);
    }
  }
}

TEST(Retrieval, SaveLoadAndIdentityCheck) {
  testing::TempDir dir("index");
  const auto c = random_corpus(7, 50);
  const auto embedder = fitted(c);
  const auto idx = build_index(c, embedder);
  idx.save(dir / "i.jsonl");
  const auto back = RetrievalIndex::load(dir / "i.jsonl", embedder);
  ASSERT_EQ(back.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    EXPECT_EQ(back.entries()[i].vector, idx.entries()[i].vector);
    EXPECT_EQ(back.entries()[i].target, idx.entries()[i].target);
  }
  const auto other = std::make_shared<const HashedTfidfEmbedder>();
  EXPECT_THROW(RetrievalIndex::load(dir / "i.jsonl", other), ConfigError);
  write_file(dir / "bad.jsonl", "{}\n");
  EXPECT_THROW(RetrievalIndex::load(dir / "bad.jsonl", embedder), FormatError);
}

PromptSpec spec_with(std::size_t n) {
  PromptSpec s{{}, "ሰላም ለክሙ", LanguageTag("gez"), LanguageTag("en")};
  for (std::size_t i = 0; i < n; ++i) s.examples.push_back({"src" + std::to_string(i), "tgt" + std::to_string(i)});
  return s;
}

TEST(Prompt, ZeroShot) {
  EXPECT_EQ(build_prompt(spec_with(0)), "Ge'ez: ሰላም ለክሙ\nEnglish:");
}

TEST(Prompt, OneExampleExactBytes) {
  EXPECT_EQ(build_prompt(spec_with(1)), "Ge'ez: src0\nEnglish: tgt0\nGe'ez: ሰላም ለክሙ\nEnglish:");
}

TEST(Prompt, TenExamplesMostSimilarLast) {
  const auto lines = split_lines(build_prompt(spec_with(10)));
  ASSERT_EQ(lines.size(), 22u);  // 21 content lines + cue
  EXPECT_EQ(lines[0], "Ge'ez: src9");
  EXPECT_EQ(lines[18], "Ge'ez: src0");
  EXPECT_EQ(lines[19], "English: tgt0");
  EXPECT_EQ(lines[21], "English:");
  EXPECT_THROW(build_prompt(spec_with(11)), std::invalid_argument);
}

TEST(Prompt, RejectsNewlinesAndRoundTripsThroughParser) {
  auto s = spec_with(2);
  s.query_source = "a\nb";
  EXPECT_THROW(build_prompt(s), std::invalid_argument);
  Gen g(8);
  std::set<std::string> prompts;
  for (int i = 0; i < 200; ++i) {
    PromptSpec p{{}, g.sentence(true), LanguageTag("gez"), LanguageTag("en")};
    const std::size_t n = g.below(11);
    for (std::size_t k = 0; k < n; ++k) p.examples.push_back({g.sentence(true), g.sentence(false)});
    const auto text = build_prompt(p);
    const auto parsed = parse_prompt(text);
    EXPECT_EQ(parsed.query, p.query_source);
    ASSERT_EQ(parsed.examples.size(), n);
    for (std::size_t k = 0; k < n; ++k) EXPECT_EQ(parsed.examples[n - 1 - k].first, p.examples[k].source);
    prompts.insert(text);
  }
  EXPECT_EQ(prompts.size(), 200u);
  EXPECT_EQ(language_display_name(LanguageTag("amh")), "Amharic");
  EXPECT_EQ(language_display_name(LanguageTag("tir")), "Tigrinya");
  EXPECT_EQ(language_display_name(LanguageTag("xx")), "xx");
}

TEST(BackendParams, Defaults) {
  const BackendParams p;
  EXPECT_EQ(p.top_p, 1.0);
  EXPECT_EQ(p.temperature, 0.3);
  EXPECT_EQ(p.length_multiplier, 5.0);
  EXPECT_EQ(p.max_output_tokens("a b c d e f g h i j k l"), 60u);
  EXPECT_EQ(p.max_output_tokens(""), 1u);
  EXPECT_EQ((BackendParams{1.0, 0.3, 1.5}.max_output_tokens("a b c")), 5u);
}

TEST(Wire, RequestAndResponse) {
  const CompletionRequest r{"m", "p\nq", 0.3, 1.0, 60};
  EXPECT_EQ(CompletionRequest::from_json(r.to_json()), r);
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j.size(), 5u);
  EXPECT_EQ(parse_completion_response(R"({"choices":[{"text":" hi"}]})"), " hi");
  EXPECT_EQ(parse_completion_response(R"({"text":"yo"})"), "yo");
  EXPECT_THROW(parse_completion_response("{}"), FormatError);
  EXPECT_THROW(parse_completion_response("nope"), FormatError);
  EXPECT_THROW(parse_url("ftp://x"), ConfigError);
  EXPECT_EQ(parse_url("http://h:1/v1/c").path, "/v1/c");
  EXPECT_EQ(parse_url("https://h").path, "/");
}

class FewShot : public ::testing::Test {
protected:
  void SetUp() override {
    corpus_ = random_corpus(9, 120);
    index_ = std::make_unique<RetrievalIndex>(build_index(corpus_, fitted(corpus_)));
  }

  HttpCompletionBackend backend_for(const MockCompletionServer& server, int retries = 0) {
    HttpBackendOptions o;
    o.endpoint = server.endpoint();
    o.max_retries = retries;
    o.initial_backoff_ms = 1;
    o.timeout_ms = 5000;
    return HttpCompletionBackend(o);
  }

  Corpus corpus_{kGezEn};
  std::unique_ptr<RetrievalIndex> index_;
};

TEST_F(FewShot, EchoLastExample) {
  MockCompletionServer server(Mode::kEchoLastExample);
  server.start();
  auto backend = backend_for(server);
  const auto r = translate_few_shot(*index_, backend, corpus_[3].source_text, FewShotConfig{});
  // The closest match is the sentence itself.
  EXPECT_EQ(r.translation, corpus_[3].target_text);
  EXPECT_EQ(r.matches.size(), 10u);
  ASSERT_EQ(server.request_count(), 1u);
  EXPECT_EQ(server.captured()[0].prompt, r.prompt);
}

TEST_F(FewShot, RequestCarriesParameters) {
  MockCompletionServer server(Mode::kFixed);
  server.set_fixed_text("fine\nEnglish: spurious extra");
  server.start();
  auto backend = backend_for(server);
  const std::string query = "ሀ ለ ሐ መ ሠ ረ ሰ ሸ ቀ በ ተ ቸ";  // 12 tokens
  const auto r = translate_few_shot(*index_, backend, query, FewShotConfig{});
  EXPECT_EQ(r.translation, "fine");
  const auto req = server.captured().at(0);
  EXPECT_EQ(req.top_p, 1.0);
  EXPECT_EQ(req.temperature, 0.3);
  EXPECT_EQ(req.max_tokens, 60u);
  EXPECT_EQ(req.model, "text-davinci-003");
}

TEST_F(FewShot, EmptyCompletionIsError) {
  MockCompletionServer server(Mode::kFixed);
  server.set_fixed_text("   ");
  server.start();
  auto backend = backend_for(server);
  EXPECT_THROW(translate_few_shot(*index_, backend, corpus_[0].source_text, FewShotConfig{}),
               EmptyCompletionError);
}

TEST_F(FewShot, RetriesServerErrorsThenSucceeds) {
  MockCompletionServer server(Mode::kFixed);
  server.set_fixed_text("ok");
  server.fail_first(2, 503);
  server.start();
  auto backend = backend_for(server, 3);
  EXPECT_EQ(translate_few_shot(*index_, backend, corpus_[0].source_text, FewShotConfig{}).translation, "ok");
  EXPECT_EQ(server.request_count(), 3u);
}

TEST_F(FewShot, PersistentFailureReportsStatus) {
  MockCompletionServer server(Mode::kFailWith);
  server.set_fail_status(500);
  server.start();
  auto backend = backend_for(server, 2);
  try {
    translate_few_shot(*index_, backend, corpus_[0].source_text, FewShotConfig{});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 500);
    EXPECT_TRUE(e.retriable());
  }
  EXPECT_EQ(server.request_count(), 3u);
}

TEST_F(FewShot, ClientErrorsAreNotRetried) {
  MockCompletionServer server(Mode::kFailWith);
  server.set_fail_status(401);
  server.start();
  auto backend = backend_for(server, 3);
  try {
    translate_few_shot(*index_, backend, corpus_[0].source_text, FewShotConfig{});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 401);
    EXPECT_FALSE(e.retriable());
  }
  EXPECT_EQ(server.request_count(), 1u);
}

TEST_F(FewShot, UnreachableBackendIsRetriable) {
  HttpBackendOptions o;
  o.endpoint = "http://127.0.0.1:1/v1/completions";
  o.max_retries = 1;
  o.initial_backoff_ms = 1;
  o.timeout_ms = 500;
  HttpCompletionBackend backend(o);
  try {
    translate_few_shot(*index_, backend, corpus_[0].source_text, FewShotConfig{});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.retriable());
  }
}

TEST_F(FewShot, CopyReferenceBatchScoresHundred) {
  const auto held_out = random_corpus(10, 50);
  std::map<std::string, std::string> refs;
  std::vector<std::string> queries;
  std::vector<std::string> references;
  for (const auto& p : held_out) {
    refs[p.source_text] = p.target_text;
    queries.push_back(p.source_text);
    references.push_back(p.target_text);
  }
  MockCompletionServer server(Mode::kCopyReference);
  server.set_references(refs);
  server.start();
  auto backend = backend_for(server);
  const auto before = index_->entries().size();
  const auto results = translate_batch(*index_, backend, queries, FewShotConfig{}, 2);
  std::vector<std::string> hyps;
  for (const auto& r : results) hyps.push_back(r.translation);
  EXPECT_EQ(bleu_corpus(hyps, references).score, 100.0);
  EXPECT_EQ(index_->entries().size(), before);
  EXPECT_EQ(server.request_count(), 50u);
}

TEST_F(FewShot, BatchPropagatesFailure) {
  MockCompletionServer server(Mode::kFailWith);
  server.set_fail_status(400);
  server.start();
  auto backend = backend_for(server);
  EXPECT_THROW(translate_batch(*index_, backend, {"ሀ", "ለ", "ሐ"}, FewShotConfig{}, 2), BackendError);
}

TEST(ServiceEmbedder, ParsesBothResponseShapes) {
  httplib::Server server;
  server.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    for (const auto& text : body.at("input")) {
      const double len = static_cast<double>(text.get<std::string>().size());
      data.push_back({{"embedding", {len, 0.0, 1.0}}});
    }
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  server.Post("/flat", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"embeddings":[[3.0,4.0,0.0]]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  while (!server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  const ServiceEmbedder a({base + "/embed", "m", "", 5000}, 3);
  const auto vs = a.embed_batch(std::vector<std::string>{"abc", "a"});
  ASSERT_EQ(vs.size(), 2u);
  EXPECT_NEAR(vs[0].norm(), 1.0, 1e-12);
  EXPECT_EQ(vs[0].indices, (std::vector<std::uint32_t>{0, 2}));
  const ServiceEmbedder b({base + "/flat", "m", "", 5000}, 3);
  const auto v = b.embed("x");
  EXPECT_NEAR(v.values[0], 0.6, 1e-12);
  const ServiceEmbedder wrong({base + "/flat", "m", "", 5000}, 4);
  EXPECT_THROW(wrong.embed("x"), FormatError);
  EXPECT_NE(a.identity(), HashedTfidfEmbedder().identity());
  server.stop();
  t.join();
}

}  // namespace
}  // namespace geezmt
