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
#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tadacap/agnostic_captioner.hpp"
#include "tadacap/domain_db.hpp"
#include "tadacap/errors.hpp"
#include "tadacap/providers.hpp"
#include "tadacap/report.hpp"

// Query -> shape caption -> retrieved example pairs -> prompt -> LLM ->
// cleaned in-domain caption, plus the leave-one-out benchmark driver.
namespace tadacap::pipeline {

enum class Mode { diverse, nn, random, zs, multimodal };
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);
// Row label used in reports ("TADACap-diverse", ..., "multimodal-direct").
std::string_view method_name(Mode m);
db::RetrievalMode retrieval_mode(Mode m);

enum class AgnosticSource {
  rule_based,  // deterministic shape describer over the series
  stored,      // the entry's own "agnostic" field
  external,    // multimodal model over the rendered image
};
std::string_view to_string(AgnosticSource s);
AgnosticSource parse_agnostic_source(std::string_view s);

struct PipelineConfig {
  Mode mode = Mode::diverse;
  std::string domain = "stock price series";
  std::size_t k = 4;
  std::uint64_t seed = 0;
  db::CaptionChoice caption_choice = db::CaptionChoice::first;
  AgnosticSource agnostic_source = AgnosticSource::rule_based;
  std::string model = "default";
  double temperature = 0.0;
  int max_tokens = 128;
  // Queries in flight at once.
  std::size_t concurrency = 4;
  // Base directory for entries' image_path.
  std::filesystem::path image_base;
};

struct Providers {
  llm::LlmClient* llm = nullptr;                    // diverse / nn / random / zs
  llm::LlmClient* multimodal = nullptr;             // multimodal
  caption::ExternalCaptioner* captioner = nullptr;  // AgnosticSource::external
};

class QueryError : public Error {
 public:
  QueryError(std::string query_id, const std::string& what)
      : Error("query '" + query_id + "': " + what), query_id_(std::move(query_id)) {}
  const std::string& query_id() const noexcept { return query_id_; }

 private:
  std::string query_id_;
};

// Shape captions of database entries, computed on first use and shared by
// all queries of a run.
class AgnosticCaptions {
 public:
  AgnosticCaptions(const db::Database& db, const PipelineConfig& config, const Providers& providers);

  std::string get(std::size_t index);
  std::string provider_tag() const;

 private:
  const db::Database* db_;
  AgnosticSource source_;
  std::filesystem::path image_base_;
  caption::ExternalCaptioner* captioner_;
  std::mutex mu_;
  std::vector<std::optional<std::string>> cache_;
};

struct CaptionTrace {
  std::string query_id;
  std::string mode;
  std::string query_agnostic;
  std::vector<std::string> retrieved_ids;
  std::string prompt;
  std::string raw_output;
  std::string caption;
  std::string llm_provider;
  std::string agnostic_provider;
  std::string template_version;
  // Wall time; left out of to_json so persisted runs stay byte-stable.
  double latency_ms = 0.0;
};

nlohmann::json to_json(const CaptionTrace& t);

std::vector<std::uint8_t> read_image(const db::DbEntry& e, const std::filesystem::path& base);

// Captions db.at(query_index) against the rest of the database. Failures
// are rethrown as QueryError carrying the query id.
CaptionTrace generate_caption(const db::Database& db, std::size_t query_index, const PipelineConfig& config,
                              const Providers& providers, AgnosticCaptions& agnostic);
CaptionTrace generate_caption(const db::Database& db, std::size_t query_index, const PipelineConfig& config,
                              const Providers& providers);

// Leave-one-out over the database for every mode: each query is captioned,
// scored against its reference captions (CIDEr idf over all references),
// and failures are kept per query. Mode preconditions and provider presence
// are checked before any query runs. Samples are ordered by query id.
std::vector<report::ModeResult> run_benchmark(const db::Database& db, const std::vector<Mode>& modes,
                                              const PipelineConfig& base, const Providers& providers);

}  // namespace tadacap::pipeline
