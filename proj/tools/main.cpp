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
// tadacap: synthetic data, database, selection, annotation, captioning and
// benchmark commands.

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "json_config.hpp"
#include "tadacap/caption_pipeline.hpp"
#include "tadacap/diverse_select.hpp"
#include "tadacap/domain_db.hpp"
#include "tadacap/embedding_client.hpp"
#include "tadacap/errors.hpp"
#include "tadacap/eval_metrics.hpp"
#include "tadacap/parallel.hpp"
#include "tadacap/report.hpp"
#include "tadacap/synthgen.hpp"

namespace {

namespace fs = std::filesystem;
using namespace tadacap;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

template <typename... Args>
void log(fmt::format_string<Args...> f, Args&&... args) {
  fmt::print(stderr, "tadacap: {}\n", fmt::format(f, std::forward<Args>(args)...));
}

struct Options {
  std::uint64_t seed = 0;
  bool dry_run = false;

  // synthgen
  std::string kind = "stock";
  std::size_t n = synth::kDefaultDatasetSize;
  std::size_t length = synth::kDefaultLength;
  std::string noise_mode = "relative";
  std::string trend_mode = "additive";
  bool no_images = false;
  std::size_t threads = 1;

  // paths
  std::string out;
  std::string dataset;
  std::string db;
  std::string file;
  std::string pred;
  std::string image_base;

  // embeddings
  std::string embedder = "builtin";
  std::string embed_tag = "external";
  bool use_images = false;
  std::string embed_cache;

  // selection
  std::size_t k = 4;
  bool auto_k = false;
  double gain_threshold = dpp::kDefaultGainThreshold;
  double epsilon = dpp::kDefaultEpsilon;
  std::size_t k_max = 16;
  std::string strategy = "diverse";
  std::string tasks;
  std::string trace;

  // annotation
  std::string domain = "stock price series";
  std::string annotator = "import";
  std::string ts;

  // captioning
  std::string mode = "diverse";
  std::vector<std::string> modes = {"diverse", "zs"};
  std::vector<std::string> ids;
  std::string llm = "mock:echo";
  std::string mm;
  std::string model = "default";
  double temperature = 0.0;
  int max_tokens = 128;
  int timeout = 60;
  int retries = 3;
  std::string agnostic = "rule";
  std::string caption_choice = "first";
  std::size_t concurrency = 4;

  // eval
  std::string method = "predictions";
  std::string provider = "file";
};

void add_provider_options(CLI::App* app, Options& o) {
  app->add_option("--llm", o.llm, "LLM endpoint URL or mock:echo | mock:scripted-oracle | mock:canned-file:<path>")
      ->capture_default_str();
  app->add_option("--mm", o.mm, "multimodal endpoint (multimodal mode, external shape captions)");
  app->add_option("--model", o.model, "model name sent to the providers")->capture_default_str();
  app->add_option("--temperature", o.temperature)->capture_default_str()->check(CLI::Range(0.0, 2.0));
  app->add_option("--max-tokens", o.max_tokens)->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--timeout", o.timeout, "per-request timeout in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--retries", o.retries, "attempts per request")->capture_default_str()->check(CLI::Range(1, 10));
}

void add_pipeline_options(CLI::App* app, Options& o) {
  app->add_option("--db", o.db, "database JSONL")->required();
  app->add_option("--domain", o.domain)->capture_default_str();
  app->add_option("--k", o.k, "examples per prompt (nn, random)")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--agnostic", o.agnostic, "shape caption source")
      ->capture_default_str()
      ->check(CLI::IsMember({"rule", "stored", "external"}));
  app->add_option("--caption-choice", o.caption_choice, "which annotation an example contributes")
      ->capture_default_str()
      ->check(CLI::IsMember({"first", "last", "join"}));
  app->add_option("--concurrency", o.concurrency, "queries in flight")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--image-base", o.image_base, "directory image paths are relative to (default: the db's)");
  add_provider_options(app, o);
}

net::RetryPolicy retry_policy(const Options& o) {
  net::RetryPolicy p;
  p.max_attempts = o.retries;
  p.timeout = std::chrono::seconds(o.timeout);
  return p;
}

fs::path image_base(const Options& o) {
  if (!o.image_base.empty()) return o.image_base;
  return fs::path(o.db).parent_path();
}

void write_lines(const fs::path& path, const std::vector<nlohmann::json>& rows) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : rows) out << r.dump() << '\n';
}

int cmd_synthgen(const Options& o) {
  synth::DatasetOptions opts;
  opts.length = o.length;
  opts.noise_mode = synth::parse_noise_mode(o.noise_mode);
  opts.trend_mode = synth::parse_trend_mode(o.trend_mode);
  opts.render = !o.no_images;
  opts.threads = o.threads;
  const auto samples = synth::gen_dataset(synth::parse_dataset_kind(o.kind), o.n, o.seed, opts);
  synth::write_dataset(samples, o.out);
  log("wrote {} {} samples to {}", samples.size(), o.kind, (fs::path(o.out) / "dataset.jsonl").string());
  return 0;
}

int cmd_db_build(const Options& o) {
  const auto samples = synth::read_dataset(o.dataset);
  db::Database database = db::from_dataset(samples);
  const fs::path dataset_dir = fs::path(o.dataset).parent_path();
  const fs::path db_dir = fs::absolute(o.out).parent_path();
  for (std::size_t i = 0; i < database.size(); ++i) {
    auto& e = database.at(i);
    if (e.image_path.empty()) continue;
    e.image_path = fs::relative(fs::absolute(dataset_dir / e.image_path), db_dir).generic_string();
  }
  if (o.embedder == "builtin") {
    db::embed_builtin(database, {}, o.threads);
  } else {
    embed::HttpEmbeddingService service(o.embedder, o.embed_tag, retry_policy(o));
    embed::EmbeddingCache cache;
    if (!o.embed_cache.empty()) cache.load(o.embed_cache);
    db::embed_service(database, service, cache, db_dir, o.use_images, o.concurrency);
    if (!o.embed_cache.empty()) cache.save(o.embed_cache);
  }
  db::db_save(database, o.out);
  log("wrote database with {} entries to {}", database.size(), o.out);
  return 0;
}

int cmd_db_validate(const Options& o) {
  const db::Database database = db::db_load(o.db);
  std::vector<std::string> problems;
  std::optional<std::size_t> dim;
  std::size_t embedded = 0, annotated = 0;
  for (const auto& e : database.entries()) {
    if (e.embedding) {
      ++embedded;
      const auto& v = e.embedding->values;
      if (dim && *dim != v.size()) problems.push_back(e.id + ": embedding dimension " + std::to_string(v.size()));
      dim = dim.value_or(v.size());
      double norm = 0.0;
      for (double x : v) norm += x * x;
      if (std::abs(std::sqrt(norm) - 1.0) > 1e-6) problems.push_back(e.id + ": embedding is not unit norm");
    }
    if (e.annotated()) ++annotated;
    for (const auto& a : e.annotations) {
      if (a.caption.empty()) problems.push_back(e.id + ": empty annotation");
    }
    if (e.is_diverse_exemplar != e.exemplar_rank.has_value()) {
      problems.push_back(e.id + ": exemplar flag and rank disagree");
    }
  }
  const auto exemplars = database.exemplar_indices();
  for (std::size_t r = 0; r < exemplars.size(); ++r) {
    if (database.at(exemplars[r]).exemplar_rank != r) {
      problems.push_back("exemplar ranks are not 0.." + std::to_string(exemplars.size() - 1));
      break;
    }
  }
  log("{}: {} entries, {} embedded, {} exemplars, {} annotated", o.db, database.size(), embedded, exemplars.size(),
      annotated);
  for (const auto& p : problems) log("problem: {}", p);
  if (!problems.empty()) throw FormatError(std::to_string(problems.size()) + " problem(s) in " + o.db);
  return 0;
}

int cmd_select(const Options& o) {
  db::Database database = db::db_load(o.db);
  db::AnnotationSelection result;
  if (o.strategy == "random") {
    if (o.k > database.size()) {
      throw InvalidArgument("cannot select k = " + std::to_string(o.k) + " from " + std::to_string(database.size()) +
                            " entries");
    }
    result.selection.strategy = dpp::Strategy::random;
    result.selection.seed = o.seed;
    result.selection.indices = dpp::random_select(database.size(), o.k, o.seed);
    db::mark_exemplars(database, result.selection.indices);
    result.tasks = db::pending_annotation_tasks(database, o.domain);
  } else {
    db::SelectionOptions opts;
    opts.k = o.k;
    opts.auto_k = o.auto_k;
    opts.gain_threshold = o.gain_threshold;
    opts.epsilon = o.epsilon;
    opts.k_max = o.k_max;
    result = db::select_for_annotation(database, opts, o.domain);
  }
  db::db_save(database, o.db);
  if (!o.trace.empty()) {
    nlohmann::json j = dpp::to_json(result.selection);
    nlohmann::json ids = nlohmann::json::array();
    for (std::size_t i : result.selection.indices) ids.push_back(database.at(i).id);
    j["ids"] = std::move(ids);
    write_lines(o.trace, {j});
  }
  if (!o.tasks.empty()) {
    std::vector<nlohmann::json> rows;
    for (const auto& t : result.tasks) rows.push_back(db::to_json(t));
    write_lines(o.tasks, rows);
  }
  std::string ids;
  for (std::size_t i : result.selection.indices) ids += (ids.empty() ? "" : ", ") + database.at(i).id;
  log("selected {} exemplars ({}): {}", result.selection.indices.size(), dpp::to_string(result.selection.strategy),
      ids);
  return 0;
}

int cmd_annotate_export(const Options& o) {
  const db::Database database = db::db_load(o.db);
  std::vector<nlohmann::json> rows;
  for (const auto& t : db::pending_annotation_tasks(database, o.domain)) rows.push_back(db::to_json(t));
  write_lines(o.out, rows);
  log("exported {} annotation tasks to {}", rows.size(), o.out);
  return 0;
}

int cmd_annotate_import(const Options& o) {
  db::Database database = db::db_load(o.db);
  std::ifstream in(o.file);
  if (!in) throw Error("cannot read " + o.file);
  const auto records = db::read_annotations(in, o.file);
  const std::string ts =
      o.ts.empty() ? fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::now())) : o.ts;
  db::import_annotations(database, records, o.annotator, ts);
  db::db_save(database, o.db);
  log("imported {} annotations into {}", records.size(), o.db);
  return 0;
}

struct ProviderSet {
  std::unique_ptr<llm::LlmClient> llm;
  std::unique_ptr<llm::LlmClient> mm;
  std::unique_ptr<caption::ExternalCaptioner> captioner;
  pipeline::Providers view;
};

ProviderSet make_providers(const Options& o, bool need_llm, bool need_mm) {
  ProviderSet p;
  const auto policy = retry_policy(o);
  const bool external = o.agnostic == "external";
  if (need_llm) p.llm = llm::make_llm_client(o.llm, policy);
  if (need_mm || external) {
    if (o.mm.empty()) throw ConfigError("--mm endpoint required for multimodal mode and external shape captions");
    p.mm = llm::make_multimodal_client(o.mm, policy);
  }
  if (external) p.captioner = std::make_unique<caption::ExternalCaptioner>(*p.mm, o.model);
  p.view = {p.llm.get(), p.mm.get(), p.captioner.get()};
  return p;
}

pipeline::PipelineConfig pipeline_config(const Options& o) {
  pipeline::PipelineConfig c;
  c.mode = pipeline::parse_mode(o.mode);
  c.domain = o.domain;
  c.k = o.k;
  c.seed = o.seed;
  c.caption_choice = db::parse_caption_choice(o.caption_choice);
  c.agnostic_source = pipeline::parse_agnostic_source(o.agnostic);
  c.model = o.model;
  c.temperature = o.temperature;
  c.max_tokens = o.max_tokens;
  c.concurrency = o.concurrency;
  c.image_base = image_base(o);
  return c;
}

int cmd_caption(const Options& o) {
  const db::Database database = db::db_load(o.db);
  const auto config = pipeline_config(o);
  const bool mm_mode = config.mode == pipeline::Mode::multimodal;
  ProviderSet providers = make_providers(o, !mm_mode, mm_mode);
  db::check_mode_precondition(database, pipeline::retrieval_mode(config.mode), config.k);

  std::vector<std::size_t> queries;
  if (o.ids.empty()) {
    for (const auto& item : db::leave_one_out(database, pipeline::retrieval_mode(config.mode))) {
      queries.push_back(item.query_index);
    }
  } else {
    for (const auto& id : o.ids) {
      const auto i = database.index_of(id);
      if (!i) throw InvalidArgument("unknown id '" + id + "'");
      queries.push_back(*i);
    }
  }
  pipeline::AgnosticCaptions agnostic(database, config, providers.view);
  std::vector<nlohmann::json> rows(queries.size());
  parallel_for(queries.size(), config.concurrency, [&](std::size_t i) {
    rows[i] = pipeline::to_json(pipeline::generate_caption(database, queries[i], config, providers.view, agnostic));
  });
  write_lines(o.out, rows);
  log("captioned {} queries ({}) into {}", rows.size(), o.mode, o.out);
  return 0;
}

int cmd_bench(const Options& o) {
  const db::Database database = db::db_load(o.db);
  std::vector<pipeline::Mode> modes;
  bool need_llm = false, need_mm = false;
  for (const auto& m : o.modes) {
    modes.push_back(pipeline::parse_mode(m));
    (modes.back() == pipeline::Mode::multimodal ? need_mm : need_llm) = true;
  }
  ProviderSet providers = make_providers(o, need_llm, need_mm);
  const auto results = pipeline::run_benchmark(database, modes, pipeline_config(o), providers.view);
  report::write_report(results, o.out);
  for (const auto& r : results) {
    const auto d = report::display(r.corpus);
    log("{}: ROUGE-L {:.1f}  CIDEr-D {:.1f}  SPICE-proxy {:.1f}  SPIDEr {:.1f}  ({} queries, coverage {:.1f}%)",
        r.method, d.rouge_l, d.cider_d, d.spice, d.spider, r.queries(), 100.0 * r.coverage());
  }
  log("report written to {}", o.out);
  return 0;
}

int cmd_eval(const Options& o) {
  const db::Database database = db::db_load(o.db);
  std::vector<std::vector<std::string>> refs;
  for (const auto& e : database.entries()) {
    if (!e.references.empty()) refs.push_back(e.references);
  }
  const auto idf = eval::compute_idf(refs);
  std::ifstream in(o.pred);
  if (!in) throw Error("cannot read " + o.pred);
  report::ModeResult r;
  r.method = o.method;
  r.provider = o.provider;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    report::SampleResult s;
    try {
      const auto j = nlohmann::json::parse(line);
      s.id = j.at("id").get<std::string>();
      s.caption = j.at("caption").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(o.pred + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const db::DbEntry* e = database.find(s.id);
    if (!e || e->references.empty()) {
      s.error = "no reference captions for this id";
    } else {
      s.scores = eval::score_caption(s.caption, e->references, idf);
      s.ok = true;
    }
    r.samples.push_back(std::move(s));
  }
  std::sort(r.samples.begin(), r.samples.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  report::aggregate(r);
  const std::vector<report::ModeResult> results{r};
  report::write_report(results, o.out);
  log("scored {} predictions into {}", r.queries(), o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Domain-aware time-series captioning with diverse in-context examples."};
  app.name("tadacap");
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.config_formatter(std::make_shared<tadacap::cli::JsonConfig>(&app));
  app.set_config("--config", "", "JSON file of option values; command-line flags take precedence");
  app.add_flag("--dry-run", o.dry_run, "print the resolved configuration and exit without writing");
  app.add_option("--seed", o.seed, "seed for every stochastic step")->capture_default_str();

  auto* synthgen = app.add_subcommand("synthgen", "generate a synthetic dataset with images and captions");
  synthgen->add_option("kind", o.kind, "stock | physics")->required()->check(CLI::IsMember({"stock", "physics"}));
  synthgen->add_option("-n,--n", o.n, "number of samples")->capture_default_str()->check(CLI::Range(1, 1000000));
  synthgen->add_option("--out", o.out, "output directory")->required();
  synthgen->add_option("--length", o.length)->capture_default_str()->check(CLI::Range(8, 1000000));
  synthgen->add_option("--noise-mode", o.noise_mode)
      ->capture_default_str()
      ->check(CLI::IsMember({"relative", "absolute"}));
  synthgen->add_option("--trend-mode", o.trend_mode)
      ->capture_default_str()
      ->check(CLI::IsMember({"additive", "anchor_drift"}));
  synthgen->add_flag("--no-images", o.no_images, "skip PNG rendering");
  synthgen->add_option("--threads", o.threads)->capture_default_str()->check(CLI::PositiveNumber);

  auto* dbcmd = app.add_subcommand("db", "build or validate a database");
  dbcmd->require_subcommand(1);
  auto* build = dbcmd->add_subcommand("build", "dataset JSONL -> embedded database");
  build->add_option("--dataset", o.dataset, "dataset.jsonl written by synthgen")->required();
  build->add_option("--out", o.out, "database JSONL to write")->required();
  build->add_option("--embedder", o.embedder, "builtin or an embedding service URL")->capture_default_str();
  build->add_option("--embed-tag", o.embed_tag, "provider tag for service embeddings")->capture_default_str();
  build->add_flag("--use-images", o.use_images, "send rendered images instead of raw series");
  build->add_option("--embed-cache", o.embed_cache, "embedding cache file to load and update");
  build->add_option("--threads", o.threads)->capture_default_str()->check(CLI::PositiveNumber);
  build->add_option("--concurrency", o.concurrency, "service requests in flight")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  build->add_option("--timeout", o.timeout)->capture_default_str()->check(CLI::PositiveNumber);
  build->add_option("--retries", o.retries)->capture_default_str()->check(CLI::Range(1, 10));
  auto* validate = dbcmd->add_subcommand("validate", "check a database file");
  validate->add_option("--db", o.db)->required();

  auto* select = app.add_subcommand("select", "choose the exemplars to annotate");
  select->add_option("--db", o.db)->required();
  select->add_option("--k", o.k, "number of exemplars")->capture_default_str()->check(CLI::PositiveNumber);
  select->add_flag("--auto", o.auto_k, "stop when the marginal gain drops below --gain-threshold");
  select->add_option("--gain-threshold", o.gain_threshold, "log-det gain cut-off for --auto")->capture_default_str();
  select->add_option("--k-max", o.k_max, "upper bound for --auto")->capture_default_str()->check(CLI::PositiveNumber);
  select->add_option("--epsilon", o.epsilon)->capture_default_str()->check(CLI::NonNegativeNumber);
  select->add_option("--strategy", o.strategy)->capture_default_str()->check(CLI::IsMember({"diverse", "random"}));
  select->add_option("--domain", o.domain)->capture_default_str();
  select->add_option("--tasks", o.tasks, "write annotation tasks here");
  select->add_option("--trace", o.trace, "write the selection (indices, gains) here");

  auto* annotate = app.add_subcommand("annotate", "annotation round trip");
  annotate->require_subcommand(1);
  auto* exp = annotate->add_subcommand("export", "tasks for exemplars without annotations");
  exp->add_option("--db", o.db)->required();
  exp->add_option("--out", o.out)->required();
  exp->add_option("--domain", o.domain)->capture_default_str();
  auto* imp = annotate->add_subcommand("import", "append captions from JSONL {\"id\", \"caption\"}");
  imp->add_option("--db", o.db)->required();
  imp->add_option("--file", o.file)->required();
  imp->add_option("--annotator", o.annotator, "used when a record has none")->capture_default_str();
  imp->add_option("--ts", o.ts, "timestamp for records without one (default: now, UTC)");

  auto* caption = app.add_subcommand("caption", "caption queries and write traces");
  add_pipeline_options(caption, o);
  caption->add_option("--mode", o.mode)
      ->capture_default_str()
      ->check(CLI::IsMember({"diverse", "nn", "random", "zs", "multimodal"}));
  caption->add_option("--id", o.ids, "query ids (default: every leave-one-out query)");
  caption->add_option("--out", o.out, "trace JSONL")->required();

  auto* bench = app.add_subcommand("bench", "leave-one-out benchmark with report");
  add_pipeline_options(bench, o);
  bench->add_option("--modes", o.modes)
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::IsMember({"diverse", "nn", "random", "zs", "multimodal"}));
  bench->add_option("--out", o.out, "report directory")->required();

  auto* evalcmd = app.add_subcommand("eval", "score predicted captions against database references");
  evalcmd->add_option("--db", o.db)->required();
  evalcmd->add_option("--pred", o.pred, "JSONL {\"id\", \"caption\"}")->required();
  evalcmd->add_option("--method", o.method)->capture_default_str();
  evalcmd->add_option("--provider", o.provider)->capture_default_str();
  evalcmd->add_option("--out", o.out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (o.dry_run) {
    std::cout << tadacap::cli::JsonConfig::resolved(&app).dump(2) << '\n';
    return 0;
  }

  try {
    if (synthgen->parsed()) return cmd_synthgen(o);
    if (build->parsed()) return cmd_db_build(o);
    if (validate->parsed()) return cmd_db_validate(o);
    if (select->parsed()) return cmd_select(o);
    if (exp->parsed()) return cmd_annotate_export(o);
    if (imp->parsed()) return cmd_annotate_import(o);
    if (caption->parsed()) return cmd_caption(o);
    if (bench->parsed()) return cmd_bench(o);
    if (evalcmd->parsed()) return cmd_eval(o);
  } catch (const tadacap::ConfigError& e) {
    log("configuration error: {}", e.what());
    return kExitConfig;
  } catch (const tadacap::InvalidArgument& e) {
    log("invalid argument: {}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    log("error: {}", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
