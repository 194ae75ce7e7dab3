// Copyright 2026 The tadacap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "tadacap/caption_pipeline.hpp"
#include "tadacap/prompts.hpp"
#include "tadacap/providers.hpp"
#include "tadacap/report.hpp"
#include "tadacap/synthgen.hpp"

namespace tadacap::pipeline {
namespace {

namespace fs = std::filesystem;

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

db::Database make_db(std::size_t n, std::uint64_t seed, std::size_t k) {
  synth::DatasetOptions opt;
  opt.render = false;
  auto db = db::from_dataset(synth::gen_dataset(synth::DatasetKind::stock, n, seed, opt));
  db::embed_builtin(db);
  if (k > 0) (void)db::select_for_annotation(db, {.k = k}, "stock price series");
  return db;
}

void annotate(db::Database& db, const std::vector<std::size_t>& which) {
  std::vector<db::AnnotationRecord> recs;
  for (auto i : which) recs.push_back({db.at(i).id, db.at(i).references.at(0), "", ""});
  db::import_annotations(db, recs, "test", "t");
}

void annotate_all(db::Database& db) {
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < db.size(); ++i) all.push_back(i);
  annotate(db, all);
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    db_ = make_db(40, 5, 4);
    annotate(db_, db_.exemplar_indices());
    providers_.llm = &echo_;
  }
  std::size_t first_non_exemplar() const {
    for (std::size_t i = 0; i < db_.size(); ++i) {
      if (!db_.at(i).is_diverse_exemplar) return i;
    }
    return 0;
  }
  db::Database db_;
  llm::EchoLlm echo_;
  Providers providers_;
};

TEST_F(PipelineTest, DiverseTraceHasKPairs) {
  PipelineConfig cfg;
  const auto qi = first_non_exemplar();
  const auto t = generate_caption(db_, qi, cfg, providers_);
  EXPECT_EQ(t.query_id, db_.at(qi).id);
  EXPECT_EQ(t.retrieved_ids.size(), 4u);
  EXPECT_EQ(count(t.prompt, "Generic: "), 5u);
  EXPECT_EQ(count(t.prompt, "\nIn-domain: "), 4u);
  EXPECT_FALSE(t.caption.empty());
  EXPECT_EQ(t.caption, "Generic: " + t.query_agnostic);
  EXPECT_EQ(t.template_version, "icl-v1");
  EXPECT_EQ(t.agnostic_provider, "rule-based-v1");
  EXPECT_EQ(t.llm_provider, "mock:echo");
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(t.retrieved_ids[r], db_.at(db_.exemplar_indices()[r]).id);
}

TEST_F(PipelineTest, ZeroShotRetrievesNothing) {
  PipelineConfig cfg;
  cfg.mode = Mode::zs;
  const auto t = generate_caption(db_, 0, cfg, providers_);
  EXPECT_TRUE(t.retrieved_ids.empty());
  EXPECT_EQ(t.prompt, prompts::build_zs_prompt(t.query_agnostic, "stock price series").text);
}

TEST_F(PipelineTest, NearestNeighbourSkipsDuplicatedQuery) {
  annotate_all(db_);
  db::DbEntry twin = db_.at(3);
  twin.id = "zz-twin";
  twin.is_diverse_exemplar = false;
  twin.exemplar_rank.reset();
  db_.add(twin);
  PipelineConfig cfg;
  cfg.mode = Mode::nn;
  const auto t = generate_caption(db_, 3, cfg, providers_);
  ASSERT_EQ(t.retrieved_ids.size(), 4u);
  EXPECT_EQ(t.retrieved_ids[0], "zz-twin");
  for (const auto& id : t.retrieved_ids) EXPECT_NE(id, db_.at(3).id);
}

TEST_F(PipelineTest, StoredAgnosticSource) {
  PipelineConfig cfg;
  cfg.mode = Mode::zs;
  cfg.agnostic_source = AgnosticSource::stored;
  const auto t = generate_caption(db_, 2, cfg, providers_);
  EXPECT_EQ(t.query_agnostic, db_.at(2).agnostic);
  EXPECT_EQ(t.agnostic_provider, "stored");
}

TEST_F(PipelineTest, ErrorsCarryQueryId) {
  PipelineConfig cfg;
  const auto ex = db_.exemplar_indices().front();
  try {
    generate_caption(db_, ex, cfg, providers_);
    FAIL();
  } catch (const QueryError& e) {
    EXPECT_EQ(e.query_id(), db_.at(ex).id);
  }
  Providers none;
  EXPECT_THROW(generate_caption(db_, 0, cfg, none), QueryError);
}

TEST_F(PipelineTest, BenchmarkDiverseProtocol) {
  PipelineConfig cfg;
  const auto res = run_benchmark(db_, {Mode::diverse}, cfg, providers_);
  ASSERT_EQ(res.size(), 1u);
  const auto& r = res[0];
  EXPECT_EQ(r.method, "TADACap-diverse");
  EXPECT_EQ(r.queries(), 36u);
  EXPECT_EQ(r.scored(), 36u);
  std::set<std::string> exemplar_ids;
  for (auto i : db_.exemplar_indices()) exemplar_ids.insert(db_.at(i).id);
  std::vector<std::string> first;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto& s = r.samples[i];
    if (i > 0) EXPECT_LT(r.samples[i - 1].id, s.id);
    EXPECT_FALSE(exemplar_ids.count(s.id));
    const auto ids = s.detail["retrieved_ids"].get<std::vector<std::string>>();
    if (first.empty()) first = ids;
    EXPECT_EQ(ids, first);  // same example pairs for every query
    EXPECT_EQ(std::find(ids.begin(), ids.end(), s.id), ids.end());
    EXPECT_EQ(count(s.detail["prompt"].get<std::string>(), "Generic: "), 5u);
  }
}

TEST_F(PipelineTest, NnNeedsFullAnnotationBeforeAnyCall) {
  PipelineConfig cfg;
  EXPECT_THROW(run_benchmark(db_, {Mode::diverse, Mode::nn}, cfg, providers_), PreconditionError);
  EXPECT_EQ(echo_.calls(), 0u);
  annotate_all(db_);
  const auto res = run_benchmark(db_, {Mode::nn, Mode::random}, cfg, providers_);
  EXPECT_EQ(res[0].queries(), 40u);
  EXPECT_EQ(res[1].queries(), 40u);
  EXPECT_EQ(res[1].method, "TADACap-random");
  for (const auto& s : res[1].samples) {
    const auto ids = s.detail["retrieved_ids"].get<std::vector<std::string>>();
    EXPECT_EQ(ids.size(), 4u);
    EXPECT_EQ(std::find(ids.begin(), ids.end(), s.id), ids.end());
  }
}

TEST(Benchmark, ZeroShotNeedsNoAnnotations) {
  auto db = make_db(12, 3, 0);
  llm::EchoLlm echo;
  Providers p{&echo, nullptr, nullptr};
  const auto res = run_benchmark(db, {Mode::zs}, PipelineConfig{}, p);
  EXPECT_EQ(res[0].queries(), 12u);
  EXPECT_EQ(res[0].coverage(), 1.0);
}

TEST(Benchmark, EmptyDatabase) {
  llm::EchoLlm echo;
  Providers p{&echo, nullptr, nullptr};
  const auto res = run_benchmark(db::Database{}, {Mode::diverse, Mode::zs}, PipelineConfig{}, p);
  ASSERT_EQ(res.size(), 2u);
  EXPECT_EQ(res[0].queries(), 0u);
  EXPECT_EQ(res[0].corpus.rouge_l, 0.0);
  EXPECT_EQ(echo.calls(), 0u);
}

TEST(Benchmark, MissingProviderIsConfigError) {
  auto db = make_db(6, 3, 0);
  EXPECT_THROW(run_benchmark(db, {Mode::zs}, PipelineConfig{}, Providers{}), ConfigError);
}

TEST(Benchmark, DeterministicAcrossRunsAndConcurrency) {
  auto db = make_db(60, 9, 4);
  annotate_all(db);
  llm::ScriptedOracleLlm oracle;
  Providers p{&oracle, nullptr, nullptr};
  PipelineConfig a;
  a.concurrency = 1;
  a.seed = 3;
  PipelineConfig b = a;
  b.concurrency = 8;
  const std::vector<Mode> modes{Mode::diverse, Mode::nn, Mode::random, Mode::zs};
  const auto ra = run_benchmark(db, modes, a, p);
  const auto rb = run_benchmark(db, modes, b, p);
  EXPECT_EQ(report::to_per_sample_jsonl(ra), report::to_per_sample_jsonl(rb));
  EXPECT_EQ(report::to_csv(ra), report::to_csv(rb));
  PipelineConfig c = a;
  c.seed = 4;
  const auto rc = run_benchmark(db, {Mode::random}, c, p);
  EXPECT_NE(report::to_per_sample_jsonl(rc), report::to_per_sample_jsonl(std::span(&ra[2], 1)));
}

// Fails for queries whose shape caption mentions a downward trend.
class PickyLlm : public llm::LlmClient {
 public:
  std::string complete(const llm::CompletionRequest& r) override {
    ++calls_;
    if (llm::extract_query_caption(r.prompt).find("goes downward") != std::string::npos) {
      throw TransportError("upstream 503");
    }
    return "The price moves.";
  }
  std::string provider_tag() const override { return "picky"; }
  std::uint64_t calls() const override { return calls_.load(); }

 private:
  std::atomic<std::uint64_t> calls_{0};
};

TEST(Benchmark, FailuresRecordedWithCoverage) {
  auto db = make_db(80, 2, 0);
  PickyLlm picky;
  Providers p{&picky, nullptr, nullptr};
  const auto res = run_benchmark(db, {Mode::zs}, PipelineConfig{}, p);
  const auto& r = res[0];
  ASSERT_GT(r.scored(), 0u);
  ASSERT_LT(r.scored(), r.queries());
  for (const auto& s : r.samples) {
    if (s.ok) continue;
    EXPECT_NE(s.error.find(s.id), std::string::npos) << s.error;
    EXPECT_NE(s.error.find("503"), std::string::npos);
  }
  EXPECT_DOUBLE_EQ(r.coverage(), static_cast<double>(r.scored()) / static_cast<double>(r.queries()));
  EXPECT_NE(report::to_markdown(res).find("incomplete coverage"), std::string::npos);
}

class CapturingLlm : public llm::LlmClient {
 public:
  explicit CapturingLlm(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const llm::CompletionRequest& r) override {
    std::lock_guard lock(mu_);
    ++calls_;
    prompts.push_back(r.prompt);
    images.push_back(r.image.size());
    return reply_;
  }
  std::string provider_tag() const override { return "capture"; }
  std::uint64_t calls() const override { return calls_; }
  std::vector<std::string> prompts;
  std::vector<std::size_t> images;

 private:
  std::mutex mu_;
  std::string reply_;
  std::uint64_t calls_ = 0;
};

class ImageDbTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "tadacap_pipeline_images";
    fs::remove_all(dir_);
    const auto ds = synth::gen_dataset(synth::DatasetKind::stock, 10, 4);
    synth::write_dataset(ds, dir_);
    db_ = db::from_dataset(ds);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
  db::Database db_;
};

TEST_F(ImageDbTest, MultimodalDirectSendsImageAndInstruction) {
  CapturingLlm mm("  The price climbs steadily.  ");
  Providers p{nullptr, &mm, nullptr};
  PipelineConfig cfg;
  cfg.mode = Mode::multimodal;
  cfg.image_base = dir_;
  const auto res = run_benchmark(db_, {Mode::multimodal}, cfg, p);
  EXPECT_EQ(res[0].method, "multimodal-direct");
  EXPECT_EQ(res[0].scored(), 10u);
  EXPECT_EQ(res[0].samples[0].caption, "The price climbs steadily.");
  ASSERT_EQ(mm.prompts.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(mm.prompts[i], "Describe the time-series in the context of stock price series.");
    EXPECT_GT(mm.images[i], 8u);
  }
}

TEST_F(ImageDbTest, ExternalShapeCaptionsAreCached) {
  CapturingLlm vision("It grows.");
  caption::ExternalCaptioner captioner(vision);
  llm::EchoLlm echo;
  Providers p{&echo, nullptr, &captioner};
  PipelineConfig cfg;
  cfg.mode = Mode::zs;
  cfg.agnostic_source = AgnosticSource::external;
  cfg.image_base = dir_;
  (void)run_benchmark(db_, {Mode::zs}, cfg, p);
  (void)run_benchmark(db_, {Mode::zs}, cfg, p);
  EXPECT_LE(vision.calls(), 10u);
  EXPECT_EQ(captioner.cache_size(), 10u);
  PipelineConfig bad = cfg;
  Providers no_captioner{&echo, nullptr, nullptr};
  EXPECT_THROW(run_benchmark(db_, {Mode::zs}, bad, no_captioner), ConfigError);
}

TEST(Modes, Names) {
  for (auto m : {Mode::diverse, Mode::nn, Mode::random, Mode::zs, Mode::multimodal}) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  EXPECT_EQ(method_name(Mode::zs), "TADACap-zs");
  EXPECT_THROW(parse_mode("knn"), InvalidArgument);
  EXPECT_EQ(parse_agnostic_source("rule"), AgnosticSource::rule_based);
  EXPECT_THROW(parse_agnostic_source("gpt"), InvalidArgument);
}

}  // namespace
}  // namespace tadacap::pipeline
