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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tadacap/diverse_select.hpp"
#include "tadacap/embedding_client.hpp"
#include "tadacap/embeddings.hpp"
#include "tadacap/synthgen.hpp"

// Target-domain database: series with embeddings, reference captions,
// append-only annotations and the diverse exemplar flags.
namespace tadacap::db {

struct Annotation {
  std::string caption;
  std::string annotator;
  std::string ts;

  bool operator==(const Annotation&) const = default;
};

struct DbEntry {
  std::string id;
  std::string kind;
  std::vector<double> series;
  std::string image_path;
  std::optional<embed::EmbeddingVector> embedding;
  // Generator's shape caption, when the entry came from synthetic data.
  std::string agnostic;
  // Ground-truth in-domain captions ("in_domain"); used for scoring only.
  std::vector<std::string> references;
  // Captions available for in-context examples, in import order.
  std::vector<Annotation> annotations;
  std::string regime;
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  bool is_diverse_exemplar = false;
  // Position in the greedy selection order; set iff is_diverse_exemplar.
  std::optional<std::size_t> exemplar_rank;

  bool annotated() const noexcept { return !annotations.empty(); }
  std::vector<std::string> in_domain_captions() const;
  bool operator==(const DbEntry&) const = default;
};

class Database {
 public:
  Database() = default;

  // Throws FormatError on a duplicate id.
  void add(DbEntry entry);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<DbEntry>& entries() const noexcept { return entries_; }
  const DbEntry& at(std::size_t i) const { return entries_.at(i); }
  DbEntry& at(std::size_t i) { return entries_.at(i); }

  std::optional<std::size_t> index_of(std::string_view id) const;
  const DbEntry* find(std::string_view id) const;
  DbEntry* find(std::string_view id);

  // Exemplar positions ordered by exemplar_rank.
  std::vector<std::size_t> exemplar_indices() const;

  bool operator==(const Database& other) const { return entries_ == other.entries_; }

 private:
  std::vector<DbEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

nlohmann::json to_json(const DbEntry& e);
DbEntry entry_from_json(const nlohmann::json& j);

DbEntry entry_from_sample(const synth::TimeSeriesSample& s);
Database from_dataset(std::span<const synth::TimeSeriesSample> samples);

// Fills every entry's embedding with the built-in featurizer.
void embed_builtin(Database& db, const embed::FeatureConfig& config = {}, std::size_t threads = 1);

// Fills embeddings from an external service (series payloads, or the PNG at
// image_base / image_path when use_images is set).
void embed_service(Database& db, embed::EmbeddingService& service, embed::EmbeddingCache& cache,
                   const std::filesystem::path& image_base, bool use_images, std::size_t max_in_flight = 4);

void write_jsonl(const Database& db, std::ostream& out);
// Malformed lines are reported with 1-based line numbers.
Database read_jsonl(std::istream& in, std::string_view source = "<stream>");

void db_save(const Database& db, const std::filesystem::path& path);
Database db_load(const std::filesystem::path& path);

struct AnnotationTask {
  std::string entry_id;
  std::string image_path;
  std::string domain;
  std::string instruction;

  bool operator==(const AnnotationTask&) const = default;
};

nlohmann::json to_json(const AnnotationTask& t);

struct SelectionOptions {
  std::size_t k = 4;
  bool auto_k = false;
  double gain_threshold = dpp::kDefaultGainThreshold;
  double epsilon = dpp::kDefaultEpsilon;
  // Upper bound for auto_k; clamped to the database size.
  std::size_t k_max = 16;
};

struct AnnotationSelection {
  dpp::SubsetSelection selection;
  std::vector<AnnotationTask> tasks;
};

// Runs kernel build + greedy (or auto-k) selection over all entries, resets
// and re-marks the exemplar flags, and emits one task per exemplar.
// Deterministic, so re-running on an unchanged database is a no-op.
AnnotationSelection select_for_annotation(Database& db, const SelectionOptions& options, std::string_view domain);

// Marks an externally chosen index list as the exemplar set.
void mark_exemplars(Database& db, std::span<const std::size_t> indices);

// Tasks for exemplars that still have no annotation.
std::vector<AnnotationTask> pending_annotation_tasks(const Database& db, std::string_view domain);

struct AnnotationRecord {
  std::string id;
  std::string caption;
  std::string annotator;
  std::string ts;
};

// JSONL of {"id", "caption"} with optional "annotator" and "ts".
std::vector<AnnotationRecord> read_annotations(std::istream& in, std::string_view source = "<stream>");

// Appends every record or none: unknown ids or empty captions raise
// FormatError listing all offenders. Missing annotator/ts take the defaults.
void import_annotations(Database& db, std::span<const AnnotationRecord> records,
                        std::string_view default_annotator = "import", std::string_view default_ts = "");

enum class CaptionChoice { first, last, join };
CaptionChoice parse_caption_choice(std::string_view s);
std::string_view to_string(CaptionChoice c);

// The in-domain caption an entry contributes to a prompt.
std::string example_caption(const DbEntry& e, CaptionChoice choice = CaptionChoice::first);

enum class RetrievalMode { diverse, nearest_neighbor, random, none };
std::string_view to_string(RetrievalMode m);

// Positions of k annotated entries for the query, never the query itself.
//   diverse: the stored exemplar set in selection order (k is ignored)
//   nearest_neighbor: top-k cosine neighbours among annotated entries
//   random: seeded draw among annotated entries
std::vector<std::size_t> retrieve(const Database& db, const DbEntry& query, RetrievalMode mode, std::size_t k,
                                  std::uint64_t seed);

// Checks the annotation state a captioning mode needs. Diverse needs every
// exemplar annotated; nearest-neighbour and random need every entry
// annotated. Throws PreconditionError naming the missing step.
void check_mode_precondition(const Database& db, RetrievalMode mode, std::size_t k);

// The database minus one query entry.
class DbView {
 public:
  DbView(const Database& db, std::size_t excluded) : db_(&db), excluded_(excluded) {}

  const Database& database() const noexcept { return *db_; }
  std::size_t excluded() const noexcept { return excluded_; }
  std::size_t size() const noexcept { return db_->size() - 1; }
  bool contains(std::size_t i) const noexcept { return i < db_->size() && i != excluded_; }

 private:
  const Database* db_;
  std::size_t excluded_;
};

struct LooItem {
  std::size_t query_index;
  DbView view;
};

// One item per entry; in diverse mode exemplars are never queries.
std::vector<LooItem> leave_one_out(const Database& db, RetrievalMode mode);

}  // namespace tadacap::db
