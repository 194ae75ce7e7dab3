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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "tadacap/embeddings.hpp"
#include "tadacap/http_transport.hpp"

namespace tadacap::embed {

enum class PayloadKind { image, series };

struct EmbedPayload {
  std::string id;
  PayloadKind kind = PayloadKind::series;
  std::vector<std::uint8_t> bytes;
};

// Series payloads travel as little-endian IEEE-754 float64 values.
EmbedPayload series_payload(std::string id, std::span<const double> series);
EmbedPayload image_payload(std::string id, std::vector<std::uint8_t> png);

class EmbeddingService {
 public:
  virtual ~EmbeddingService() = default;
  virtual std::vector<double> fetch(const EmbedPayload& payload) = 0;
  virtual std::string provider_tag() const = 0;
};

// POST {"id", "payload_b64", "kind"} -> {"vector": [...], "dim": n}.
class HttpEmbeddingService final : public EmbeddingService {
 public:
  HttpEmbeddingService(std::string url, std::string provider_tag, net::RetryPolicy policy = {},
                       const char* api_key_env = "TADACAP_EMBED_API_KEY");

  std::vector<double> fetch(const EmbedPayload& payload) override;
  std::string provider_tag() const override { return provider_tag_; }

 private:
  net::JsonHttpClient client_;
  std::string provider_tag_;
};

// Vectors keyed by (provider_tag, SHA-256 of payload). Safe for concurrent
// lookup/insert. One dimension per provider tag; a vector of a different
// dimension is rejected.
class EmbeddingCache {
 public:
  static std::string key(const std::string& provider_tag, std::span<const std::uint8_t> bytes);

  std::optional<std::vector<double>> lookup(const std::string& key) const;
  void insert(const std::string& key, const std::string& provider_tag, std::vector<double> values);
  std::optional<std::size_t> dimension(const std::string& provider_tag) const;
  std::size_t size() const;

  // JSONL: {"key", "provider_tag", "vector"} per line.
  void save(const std::filesystem::path& path) const;
  // Merges a saved cache; a missing file is not an error.
  void load(const std::filesystem::path& path);

 private:
  struct Entry {
    std::string provider_tag;
    std::vector<double> values;
  };
  mutable std::shared_mutex mu_;
  std::map<std::string, Entry> entries_;
  std::map<std::string, std::size_t> dims_;
};

// Service-backed embedding, L2-normalized on receipt and cached.
EmbeddingVector embed_external(const EmbedPayload& payload, EmbeddingService& service, EmbeddingCache& cache);

// Embeds many payloads with at most max_in_flight concurrent requests;
// byte-identical payloads are fetched once.
std::vector<EmbeddingVector> embed_external_batch(std::span<const EmbedPayload> payloads,
                                                  EmbeddingService& service, EmbeddingCache& cache,
                                                  std::size_t max_in_flight = 4);

}  // namespace tadacap::embed
