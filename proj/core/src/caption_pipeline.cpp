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
#include "tadacap/caption_pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "tadacap/eval_metrics.hpp"
#include "tadacap/parallel.hpp"
#include "tadacap/prompts.hpp"
#include "tadacap/rng.hpp"

namespace tadacap::pipeline {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::diverse: return "diverse";
    case Mode::nn: return "nn";
    case Mode::random: return "random";
    case Mode::zs: return "zs";
    case Mode::multimodal: return "multimodal";
  }
  return "diverse";
}

Mode parse_mode(std::string_view s) {
  if (s == "diverse") return Mode::diverse;
  if (s == "nn") return Mode::nn;
  if (s == "random") return Mode::random;
  if (s == "zs") return Mode::zs;
  if (s == "multimodal") return Mode::multimodal;
  throw InvalidArgument("unknown mode '" + std::string(s) + "' (diverse|nn|random|zs|multimodal)");
}

std::string_view method_name(Mode m) {
  switch (m) {
    case Mode::diverse: return "TADACap-diverse";
    case Mode::nn: return "TADACap-nn";
    case Mode::random: return "TADACap-random";
    case Mode::zs: return "TADACap-zs";
    case Mode::multimodal: return "multimodal-direct";
  }
  return "TADACap-diverse";
}

db::RetrievalMode retrieval_mode(Mode m) {
  switch (m) {
    case Mode::diverse: return db::RetrievalMode::diverse;
    case Mode::nn: return db::RetrievalMode::nearest_neighbor;
    case Mode::random: return db::RetrievalMode::random;
    case Mode::zs:
    case Mode::multimodal: return db::RetrievalMode::none;
  }
  return db::RetrievalMode::none;
}

std::string_view to_string(AgnosticSource s) {
  switch (s) {
    case AgnosticSource::rule_based: return "rule";
    case AgnosticSource::stored: return "stored";
    case AgnosticSource::external: return "external";
  }
  return "rule";
}

AgnosticSource parse_agnostic_source(std::string_view s) {
  if (s == "rule") return AgnosticSource::rule_based;
  if (s == "stored") return AgnosticSource::stored;
  if (s == "external") return AgnosticSource::external;
  throw InvalidArgument("unknown agnostic caption source '" + std::string(s) + "' (rule|stored|external)");
}

std::vector<std::uint8_t> read_image(const db::DbEntry& e, const std::filesystem::path& base) {
  if (e.image_path.empty()) throw PreconditionError("entry '" + e.id + "' has no image");
  const auto path = base / e.image_path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read image " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

AgnosticCaptions::AgnosticCaptions(const db::Database& db, const PipelineConfig& config, const Providers& providers)
    : db_(&db),
      source_(config.agnostic_source),
      image_base_(config.image_base),
      captioner_(providers.captioner),
      cache_(db.size()) {
  if (source_ == AgnosticSource::external && !captioner_) {
    throw ConfigError("external shape captions need a multimodal captioner");
  }
}

std::string AgnosticCaptions::get(std::size_t index) {
  {
    std::lock_guard lock(mu_);
    if (cache_.at(index)) return *cache_[index];
  }
  const db::DbEntry& e = db_->at(index);
  std::string text;
  switch (source_) {
    case AgnosticSource::rule_based:
      text = caption::agnostic_caption_rule_based(e.series);
      break;
    case AgnosticSource::stored:
      if (e.agnostic.empty()) throw PreconditionError("entry '" + e.id + "' has no stored shape caption");
      text = e.agnostic;
      break;
    case AgnosticSource::external:
      text = captioner_->caption(read_image(e, image_base_));
      break;
  }
  std::lock_guard lock(mu_);
  if (!cache_[index]) cache_[index] = std::move(text);
  return *cache_[index];
}

std::string AgnosticCaptions::provider_tag() const {
  switch (source_) {
    case AgnosticSource::rule_based: return "rule-based-v1";
    case AgnosticSource::stored: return "stored";
    case AgnosticSource::external: return captioner_->provider_tag();
  }
  return "";
}

nlohmann::json to_json(const CaptionTrace& t) {
  return {{"query_id", t.query_id},
          {"mode", t.mode},
          {"query_agnostic", t.query_agnostic},
          {"retrieved_ids", t.retrieved_ids},
          {"prompt", t.prompt},
          {"raw_output", t.raw_output},
          {"caption", t.caption},
          {"llm_provider", t.llm_provider},
          {"agnostic_provider", t.agnostic_provider},
          {"template_version", t.template_version}};
}

namespace {

CaptionTrace run_query(const db::Database& db, std::size_t qi, const PipelineConfig& config,
                       const Providers& providers, AgnosticCaptions& agnostic) {
  const db::DbEntry& query = db.at(qi);
  CaptionTrace t;
  t.query_id = query.id;
  t.mode = std::string(to_string(config.mode));
  t.template_version = std::string(prompts::kTemplateVersion);

  llm::CompletionRequest req;
  req.model = config.model;
  req.temperature = config.temperature;
  req.max_tokens = config.max_tokens;
  llm::LlmClient* client = providers.llm;

  if (config.mode == Mode::multimodal) {
    client = providers.multimodal;
    if (!client) throw ConfigError("multimodal mode needs a multimodal provider");
    req.prompt = prompts::build_multimodal_prompt(config.domain).text;
    req.image = read_image(query, config.image_base);
  } else {
    if (!client) throw ConfigError("mode " + t.mode + " needs an LLM provider");
    t.agnostic_provider = agnostic.provider_tag();
    t.query_agnostic = agnostic.get(qi);
    if (config.mode == Mode::zs) {
      req.prompt = prompts::build_zs_prompt(t.query_agnostic, config.domain).text;
    } else {
      const auto seed = derive_seed(config.seed, hash_string(query.id));
      const auto picked = db::retrieve(db, query, retrieval_mode(config.mode), config.k, seed);
      std::vector<prompts::ExamplePair> pairs;
      pairs.reserve(picked.size());
      for (std::size_t i : picked) {
        t.retrieved_ids.push_back(db.at(i).id);
        pairs.push_back({agnostic.get(i), db::example_caption(db.at(i), config.caption_choice)});
      }
      req.prompt = prompts::build_icl_prompt(pairs, t.query_agnostic, config.domain).text;
    }
  }
  t.llm_provider = client->provider_tag();
  t.prompt = req.prompt;
  t.raw_output = client->complete(req);
  t.caption = prompts::postprocess(t.raw_output);
  if (t.caption.empty()) throw FormatError("empty caption from " + t.llm_provider);
  return t;
}

}  // namespace

CaptionTrace generate_caption(const db::Database& db, std::size_t query_index, const PipelineConfig& config,
                              const Providers& providers, AgnosticCaptions& agnostic) {
  const auto start = std::chrono::steady_clock::now();
  try {
    CaptionTrace t = run_query(db, query_index, config, providers, agnostic);
    t.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return t;
  } catch (const QueryError&) {
    throw;
  } catch (const std::exception& e) {
    throw QueryError(db.at(query_index).id, e.what());
  }
}

CaptionTrace generate_caption(const db::Database& db, std::size_t query_index, const PipelineConfig& config,
                              const Providers& providers) {
  AgnosticCaptions agnostic(db, config, providers);
  return generate_caption(db, query_index, config, providers, agnostic);
}

std::vector<report::ModeResult> run_benchmark(const db::Database& db, const std::vector<Mode>& modes,
                                              const PipelineConfig& base, const Providers& providers) {
  for (Mode m : modes) {
    if (m == Mode::multimodal ? !providers.multimodal : !providers.llm) {
      throw ConfigError(std::string("mode ") + std::string(to_string(m)) + " has no provider configured");
    }
    if (!db.empty()) db::check_mode_precondition(db, retrieval_mode(m), base.k);
  }

  std::vector<std::vector<std::string>> refs;
  for (const auto& e : db.entries()) {
    if (!e.references.empty()) refs.push_back(e.references);
  }
  const eval::CorpusIdf idf = refs.empty() ? eval::CorpusIdf{} : eval::compute_idf(refs);

  std::vector<report::ModeResult> results;
  AgnosticCaptions agnostic(db, base, providers);
  for (Mode m : modes) {
    PipelineConfig config = base;
    config.mode = m;
    report::ModeResult r;
    r.method = std::string(method_name(m));
    r.provider = (m == Mode::multimodal ? providers.multimodal : providers.llm)->provider_tag();

    const auto items = db::leave_one_out(db, retrieval_mode(m));
    r.samples.resize(items.size());
    parallel_for(items.size(), config.concurrency, [&](std::size_t i) {
      const std::size_t qi = items[i].query_index;
      const db::DbEntry& q = db.at(qi);
      report::SampleResult& s = r.samples[i];
      s.id = q.id;
      try {
        const CaptionTrace t = generate_caption(db, qi, config, providers, agnostic);
        s.caption = t.caption;
        s.detail = to_json(t);
        if (q.references.empty()) throw QueryError(q.id, "no reference captions to score against");
        s.scores = eval::score_caption(t.caption, q.references, idf);
        s.ok = true;
      } catch (const std::exception& e) {
        s.ok = false;
        s.error = e.what();
      }
    });
    std::sort(r.samples.begin(), r.samples.end(),
              [](const report::SampleResult& a, const report::SampleResult& b) { return a.id < b.id; });
    report::aggregate(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace tadacap::pipeline
