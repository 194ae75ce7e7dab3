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
#include "tadacap/embedding_client.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <unordered_map>

#include "tadacap/digest.hpp"
#include "tadacap/errors.hpp"
#include "tadacap/parallel.hpp"

namespace tadacap::embed {

EmbedPayload series_payload(std::string id, std::span<const double> series) {
  static_assert(std::endian::native == std::endian::little, "series payload assumes little-endian host");
  EmbedPayload p{std::move(id), PayloadKind::series, std::vector<std::uint8_t>(series.size() * sizeof(double))};
  if (!series.empty()) std::memcpy(p.bytes.data(), series.data(), p.bytes.size());
  return p;
}

EmbedPayload image_payload(std::string id, std::vector<std::uint8_t> png) {
  return EmbedPayload{std::move(id), PayloadKind::image, std::move(png)};
}

HttpEmbeddingService::HttpEmbeddingService(std::string url, std::string provider_tag, net::RetryPolicy policy,
                                           const char* api_key_env)
    : client_(std::move(url), net::require_env(api_key_env), std::move(policy)),
      provider_tag_(std::move(provider_tag)) {}

std::vector<double> HttpEmbeddingService::fetch(const EmbedPayload& payload) {
  const nlohmann::json body = {
      {"id", payload.id},
      {"payload_b64", base64_encode(payload.bytes)},
      {"kind", payload.kind == PayloadKind::image ? "image" : "series"},
  };
  const nlohmann::json res = client_.post(body);
  if (!res.is_object() || !res.contains("vector") || !res["vector"].is_array()) {
    throw FormatError("embedding response from " + client_.url() + " lacks a 'vector' array");
  }
  std::vector<double> values;
  values.reserve(res["vector"].size());
  for (const auto& v : res["vector"]) {
    if (!v.is_number()) throw FormatError("embedding response contains a non-numeric entry");
    values.push_back(v.get<double>());
  }
  if (res.contains("dim") && res["dim"].is_number_integer() &&
      res["dim"].get<std::size_t>() != values.size()) {
    throw FormatError("embedding response 'dim' does not match vector length");
  }
  if (values.empty()) throw FormatError("embedding response vector is empty");
  return values;
}

std::string EmbeddingCache::key(const std::string& provider_tag, std::span<const std::uint8_t> bytes) {
  return provider_tag + ":" + sha256_hex(bytes);
}

std::optional<std::vector<double>> EmbeddingCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.values;
}

void EmbeddingCache::insert(const std::string& key, const std::string& provider_tag, std::vector<double> values) {
  std::unique_lock lock(mu_);
  const auto dim = dims_.find(provider_tag);
  if (dim != dims_.end() && dim->second != values.size()) {
    throw FormatError("embedding dimension mismatch for provider '" + provider_tag + "': got " +
                      std::to_string(values.size()) + ", existing entries have " + std::to_string(dim->second));
  }
  dims_[provider_tag] = values.size();
  entries_.insert_or_assign(key, Entry{provider_tag, std::move(values)});
}

std::optional<std::size_t> EmbeddingCache::dimension(const std::string& provider_tag) const {
  std::shared_lock lock(mu_);
  const auto it = dims_.find(provider_tag);
  if (it == dims_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

void EmbeddingCache::save(const std::filesystem::path& path) const {
  std::shared_lock lock(mu_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write embedding cache " + path.string());
  for (const auto& [key, entry] : entries_) {
    out << nlohmann::json{{"key", key}, {"provider_tag", entry.provider_tag}, {"vector", entry.values}}.dump()
        << '\n';
  }
}

void EmbeddingCache::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      insert(j.at("key").get<std::string>(), j.at("provider_tag").get<std::string>(),
                   j.at("vector").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

EmbeddingVector embed_external(const EmbedPayload& payload, EmbeddingService& service, EmbeddingCache& cache) {
  const std::string tag = service.provider_tag();
  const std::string key = EmbeddingCache::key(tag, payload.bytes);
  EmbeddingVector v{payload.id, {}, tag};
  if (auto hit = cache.lookup(key)) {
    v.values = std::move(*hit);
    return v;
  }
  v.values = service.fetch(payload);
  normalize(v);
  cache.insert(key, tag, v.values);
  return v;
}

std::vector<EmbeddingVector> embed_external_batch(std::span<const EmbedPayload> payloads, EmbeddingService& service,
                                                  EmbeddingCache& cache, std::size_t max_in_flight) {
  const std::string tag = service.provider_tag();
  // First occurrence of each content hash does the fetching.
  std::unordered_map<std::string, std::size_t> first;
  std::vector<std::size_t> unique;
  std::vector<std::string> keys(payloads.size());
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    keys[i] = EmbeddingCache::key(tag, payloads[i].bytes);
    if (first.emplace(keys[i], i).second) unique.push_back(i);
  }
  parallel_for(unique.size(), max_in_flight, [&](std::size_t u) { embed_external(payloads[unique[u]], service, cache); });

  std::vector<EmbeddingVector> out;
  out.reserve(payloads.size());
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    auto values = cache.lookup(keys[i]);
    if (!values) throw Error("embedding cache lost entry for '" + payloads[i].id + "'");
    out.push_back(EmbeddingVector{payloads[i].id, std::move(*values), tag});
  }
  return out;
}

}  // namespace tadacap::embed
