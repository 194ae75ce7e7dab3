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
#include "tadacap/domain_db.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tadacap/errors.hpp"
#include "tadacap/parallel.hpp"

namespace tadacap::db {
namespace {

std::string list_ids(const std::vector<std::string>& ids, std::size_t limit = 8) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

std::vector<std::string> DbEntry::in_domain_captions() const {
  std::vector<std::string> out;
  out.reserve(annotations.size());
  for (const auto& a : annotations) out.push_back(a.caption);
  return out;
}

void Database::add(DbEntry entry) {
  if (entry.id.empty()) throw FormatError("database entry without id");
  if (index_.contains(entry.id)) throw FormatError("duplicate id '" + entry.id + "' in database");
  index_.emplace(entry.id, entries_.size());
  entries_.push_back(std::move(entry));
}

std::optional<std::size_t> Database::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const DbEntry* Database::find(std::string_view id) const {
  const auto i = index_of(id);
  return i ? &entries_[*i] : nullptr;
}

DbEntry* Database::find(std::string_view id) {
  const auto i = index_of(id);
  return i ? &entries_[*i] : nullptr;
}

std::vector<std::size_t> Database::exemplar_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].is_diverse_exemplar) out.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    return entries_[a].exemplar_rank.value_or(a) < entries_[b].exemplar_rank.value_or(b);
  });
  return out;
}

nlohmann::json to_json(const DbEntry& e) {
  nlohmann::json j = {
      {"id", e.id},
      {"kind", e.kind},
      {"series", e.series},
      {"image_path", e.image_path},
      {"agnostic", e.agnostic},
      {"in_domain", e.references},
      {"regime", e.regime},
      {"params", e.params},
  };
  if (e.seed) j["seed"] = *e.seed;
  if (e.embedding) {
    j["embedding"] = e.embedding->values;
    j["embedding_provider"] = e.embedding->provider_tag;
  } else {
    j["embedding"] = nullptr;
  }
  j["is_diverse_exemplar"] = e.is_diverse_exemplar;
  if (e.exemplar_rank) j["exemplar_rank"] = *e.exemplar_rank;
  nlohmann::json ann = nlohmann::json::array();
  for (const auto& a : e.annotations) ann.push_back({{"caption", a.caption}, {"annotator", a.annotator}, {"ts", a.ts}});
  j["annotations"] = std::move(ann);
  return j;
}

DbEntry entry_from_json(const nlohmann::json& j) {
  DbEntry e;
  e.id = j.at("id").get<std::string>();
  e.kind = j.value("kind", "");
  e.series = j.at("series").get<std::vector<double>>();
  e.image_path = j.value("image_path", "");
  e.agnostic = j.value("agnostic", "");
  e.references = j.value("in_domain", std::vector<std::string>{});
  e.regime = j.value("regime", "");
  e.params = j.value("params", nlohmann::json::object());
  if (j.contains("seed") && !j["seed"].is_null()) e.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("embedding") && !j["embedding"].is_null()) {
    e.embedding = embed::EmbeddingVector{e.id, j["embedding"].get<std::vector<double>>(),
                                         j.value("embedding_provider", "")};
  }
  e.is_diverse_exemplar = j.value("is_diverse_exemplar", false);
  if (j.contains("exemplar_rank") && !j["exemplar_rank"].is_null()) {
    e.exemplar_rank = j["exemplar_rank"].get<std::size_t>();
  }
  if (j.contains("annotations")) {
    for (const auto& a : j["annotations"]) {
      e.annotations.push_back({a.at("caption").get<std::string>(), a.value("annotator", ""), a.value("ts", "")});
    }
  }
  return e;
}

DbEntry entry_from_sample(const synth::TimeSeriesSample& s) {
  DbEntry e;
  e.id = s.id;
  e.kind = s.kind;
  e.series = s.series;
  e.image_path = s.image_path;
  e.agnostic = s.agnostic;
  e.references = s.in_domain;
  e.regime = s.regime;
  e.params = s.params;
  e.seed = s.seed;
  return e;
}

Database from_dataset(std::span<const synth::TimeSeriesSample> samples) {
  Database db;
  for (const auto& s : samples) db.add(entry_from_sample(s));
  return db;
}

void embed_builtin(Database& db, const embed::FeatureConfig& config, std::size_t threads) {
  parallel_for(db.size(), threads, [&](std::size_t i) {
    DbEntry& e = db.at(i);
    e.embedding = embed::builtin_featurize(e.series, config, e.id);
  });
}

void embed_service(Database& db, embed::EmbeddingService& service, embed::EmbeddingCache& cache,
                   const std::filesystem::path& image_base, bool use_images, std::size_t max_in_flight) {
  std::vector<embed::EmbedPayload> payloads;
  payloads.reserve(db.size());
  for (const auto& e : db.entries()) {
    payloads.push_back(use_images ? embed::image_payload(e.id, read_file(image_base / e.image_path))
                                  : embed::series_payload(e.id, e.series));
  }
  auto vectors = embed::embed_external_batch(payloads, service, cache, max_in_flight);
  for (std::size_t i = 0; i < db.size(); ++i) db.at(i).embedding = std::move(vectors[i]);
}

void write_jsonl(const Database& db, std::ostream& out) {
  for (const auto& e : db.entries()) out << to_json(e).dump() << '\n';
}

Database read_jsonl(std::istream& in, std::string_view source) {
  Database db;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    DbEntry e;
    try {
      e = entry_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": malformed entry: " + ex.what());
    }
    try {
      db.add(std::move(e));
    } catch (const FormatError& ex) {
      throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return db;
}

void db_save(const Database& db, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    write_jsonl(db, out);
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Database db_load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read database " + path.string());
  return read_jsonl(in, path.string());
}

nlohmann::json to_json(const AnnotationTask& t) {
  return {{"id", t.entry_id}, {"image_path", t.image_path}, {"domain", t.domain}, {"instruction", t.instruction}};
}

namespace {

AnnotationTask make_task(const DbEntry& e, std::string_view domain) {
  return AnnotationTask{e.id, e.image_path, std::string(domain),
                        "Write a caption describing this time-series as a " + std::string(domain) +
                            " (what it means in the domain, not only its shape)."};
}

}  // namespace

AnnotationSelection select_for_annotation(Database& db, const SelectionOptions& options, std::string_view domain) {
  std::vector<std::string> missing;
  std::vector<embed::EmbeddingVector> vectors;
  vectors.reserve(db.size());
  for (const auto& e : db.entries()) {
    if (!e.embedding) {
      missing.push_back(e.id);
    } else {
      vectors.push_back(*e.embedding);
    }
  }
  if (!missing.empty()) {
    throw PreconditionError("entries without embeddings: " + list_ids(missing) + " (run 'tadacap db build' first)");
  }
  if (options.k == 0) throw InvalidArgument("selection needs k >= 1");
  if (!options.auto_k && options.k > db.size()) {
    throw InvalidArgument("cannot select k = " + std::to_string(options.k) + " from a database of " +
                          std::to_string(db.size()) + " entries");
  }
  if (db.empty()) throw InvalidArgument("cannot select from an empty database");

  const embed::SimilarityKernel kernel = embed::build_kernel(vectors);
  AnnotationSelection out;
  out.selection = options.auto_k
                      ? dpp::auto_k(kernel, options.gain_threshold, std::min(options.k_max, db.size()), options.epsilon)
                      : dpp::greedy_map_select(kernel, options.k, options.epsilon);
  mark_exemplars(db, out.selection.indices);
  for (std::size_t i : out.selection.indices) out.tasks.push_back(make_task(db.at(i), domain));
  return out;
}

void mark_exemplars(Database& db, std::span<const std::size_t> indices) {
  for (std::size_t i : indices) {
    if (i >= db.size()) throw InvalidArgument("exemplar index " + std::to_string(i) + " out of range");
  }
  for (std::size_t i = 0; i < db.size(); ++i) {
    db.at(i).is_diverse_exemplar = false;
    db.at(i).exemplar_rank.reset();
  }
  for (std::size_t r = 0; r < indices.size(); ++r) {
    db.at(indices[r]).is_diverse_exemplar = true;
    db.at(indices[r]).exemplar_rank = r;
  }
}

std::vector<AnnotationTask> pending_annotation_tasks(const Database& db, std::string_view domain) {
  std::vector<AnnotationTask> out;
  for (std::size_t i : db.exemplar_indices()) {
    if (!db.at(i).annotated()) out.push_back(make_task(db.at(i), domain));
  }
  return out;
}

std::vector<AnnotationRecord> read_annotations(std::istream& in, std::string_view source) {
  std::vector<AnnotationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("caption").get<std::string>(), j.value("annotator", ""),
                     j.value("ts", "")});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": malformed annotation: " + e.what());
    }
  }
  return out;
}

void import_annotations(Database& db, std::span<const AnnotationRecord> records, std::string_view default_annotator,
                        std::string_view default_ts) {
  std::vector<std::string> unknown;
  std::vector<std::string> empty;
  for (const auto& r : records) {
    if (!db.find(r.id)) unknown.push_back(r.id);
    if (r.caption.find_first_not_of(" \t\r\n") == std::string::npos) empty.push_back(r.id);
  }
  if (!unknown.empty() || !empty.empty()) {
    std::string msg = "annotation import rejected:";
    if (!unknown.empty()) msg += " unknown ids [" + list_ids(unknown, unknown.size()) + "]";
    if (!empty.empty()) msg += " empty captions for [" + list_ids(empty, empty.size()) + "]";
    throw FormatError(msg);
  }
  for (const auto& r : records) {
    db.find(r.id)->annotations.push_back({r.caption, r.annotator.empty() ? std::string(default_annotator) : r.annotator,
                                          r.ts.empty() ? std::string(default_ts) : r.ts});
  }
}

CaptionChoice parse_caption_choice(std::string_view s) {
  if (s == "first") return CaptionChoice::first;
  if (s == "last") return CaptionChoice::last;
  if (s == "join") return CaptionChoice::join;
  throw InvalidArgument("unknown caption choice '" + std::string(s) + "' (first|last|join)");
}

std::string_view to_string(CaptionChoice c) {
  switch (c) {
    case CaptionChoice::first: return "first";
    case CaptionChoice::last: return "last";
    case CaptionChoice::join: return "join";
  }
  return "first";
}

std::string example_caption(const DbEntry& e, CaptionChoice choice) {
  if (e.annotations.empty()) throw PreconditionError("entry '" + e.id + "' has no in-domain annotation");
  switch (choice) {
    case CaptionChoice::first: return e.annotations.front().caption;
    case CaptionChoice::last: return e.annotations.back().caption;
    case CaptionChoice::join: {
      std::string out;
      for (const auto& a : e.annotations) out += (out.empty() ? "" : " ") + a.caption;
      return out;
    }
  }
  return e.annotations.front().caption;
}

std::string_view to_string(RetrievalMode m) {
  switch (m) {
    case RetrievalMode::diverse: return "diverse";
    case RetrievalMode::nearest_neighbor: return "nn";
    case RetrievalMode::random: return "random";
    case RetrievalMode::none: return "none";
  }
  return "none";
}

std::vector<std::size_t> retrieve(const Database& db, const DbEntry& query, RetrievalMode mode, std::size_t k,
                                  std::uint64_t seed) {
  switch (mode) {
    case RetrievalMode::none:
      return {};
    case RetrievalMode::diverse: {
      auto ex = db.exemplar_indices();
      if (ex.empty()) throw PreconditionError("no diverse exemplars selected (run 'tadacap select' first)");
      for (std::size_t i : ex) {
        if (db.at(i).id == query.id) {
          throw PreconditionError("query '" + query.id + "' is itself a diverse exemplar");
        }
        if (!db.at(i).annotated()) {
          throw PreconditionError("diverse exemplar '" + db.at(i).id +
                                  "' has no annotation (run 'tadacap annotate export' and 'annotate import')");
        }
      }
      return ex;
    }
    case RetrievalMode::nearest_neighbor: {
      if (!query.embedding) throw PreconditionError("query '" + query.id + "' has no embedding");
      std::vector<std::size_t> positions;
      std::vector<embed::EmbeddingVector> vectors;
      for (std::size_t i = 0; i < db.size(); ++i) {
        const DbEntry& e = db.at(i);
        if (e.id == query.id || !e.annotated() || !e.embedding) continue;
        positions.push_back(i);
        vectors.push_back(*e.embedding);
        vectors.back().item_id = e.id;  // the stored tag may be stale
      }
      if (positions.size() < k) {
        throw PreconditionError("nearest-neighbour retrieval needs " + std::to_string(k) +
                                " annotated entries besides the query, found " + std::to_string(positions.size()));
      }
      embed::EmbeddingVector q = *query.embedding;
      q.item_id = query.id;
      std::vector<std::size_t> out;
      for (std::size_t local : dpp::nn_select(vectors, q, k)) out.push_back(positions[local]);
      return out;
    }
    case RetrievalMode::random: {
      std::vector<std::size_t> positions;
      for (std::size_t i = 0; i < db.size(); ++i) {
        if (db.at(i).id != query.id && db.at(i).annotated()) positions.push_back(i);
      }
      if (positions.size() < k) {
        throw PreconditionError("random retrieval needs " + std::to_string(k) +
                                " annotated entries besides the query, found " + std::to_string(positions.size()));
      }
      std::vector<std::size_t> out;
      for (std::size_t local : dpp::random_select(positions.size(), k, seed)) out.push_back(positions[local]);
      return out;
    }
  }
  return {};
}

void check_mode_precondition(const Database& db, RetrievalMode mode, std::size_t k) {
  switch (mode) {
    case RetrievalMode::none:
      return;
    case RetrievalMode::diverse: {
      const auto ex = db.exemplar_indices();
      if (ex.empty()) {
        throw PreconditionError("diverse mode: no exemplars selected; run 'tadacap select --k " + std::to_string(k) +
                                "' and annotate the exemplars first");
      }
      std::vector<std::string> pending;
      for (std::size_t i : ex) {
        if (!db.at(i).annotated()) pending.push_back(db.at(i).id);
      }
      if (!pending.empty()) {
        throw PreconditionError("diverse mode: exemplars without annotations: " + list_ids(pending) +
                                "; run 'tadacap annotate export' then 'tadacap annotate import'");
      }
      return;
    }
    case RetrievalMode::nearest_neighbor:
    case RetrievalMode::random: {
      std::vector<std::string> pending;
      for (const auto& e : db.entries()) {
        if (!e.annotated()) pending.push_back(e.id);
      }
      if (!pending.empty()) {
        throw PreconditionError(std::string(to_string(mode)) + " mode needs every database entry annotated; " +
                                std::to_string(pending.size()) + " of " + std::to_string(db.size()) +
                                " lack annotations (" + list_ids(pending, 3) +
                                "); import annotations for all entries or use diverse mode");
      }
      if (db.size() < k + 1) {
        throw PreconditionError(std::string(to_string(mode)) + " mode needs at least k + 1 = " +
                                std::to_string(k + 1) + " entries");
      }
      return;
    }
  }
}

std::vector<LooItem> leave_one_out(const Database& db, RetrievalMode mode) {
  std::vector<LooItem> out;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (mode == RetrievalMode::diverse && db.at(i).is_diverse_exemplar) continue;
    out.push_back(LooItem{i, DbView(db, i)});
  }
  return out;
}

}  // namespace tadacap::db
