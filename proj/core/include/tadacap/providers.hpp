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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tadacap/http_transport.hpp"

// Text and multimodal completion providers. Endpoints are either http(s)
// URLs or "mock:<name>" for the in-process mocks:
//   mock:echo                 last non-empty prompt line (skipping the bare
//                             "In-domain:" cue)
//   mock:scripted-oracle      maps shape phrases in the query caption to
//                             domain phrases from the phrase banks
//   mock:canned-file:<path>   returns the file's content
namespace tadacap::llm {

struct CompletionRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 256;
  // PNG bytes; only multimodal providers send these.
  std::vector<std::uint8_t> image;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Raw model text. Must be safe to call concurrently.
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string provider_tag() const = 0;
  // Completions requested so far (including ones that failed).
  virtual std::uint64_t calls() const = 0;
};

inline constexpr const char* kLlmKeyEnv = "TADACAP_LLM_API_KEY";
inline constexpr const char* kMultimodalKeyEnv = "TADACAP_MM_API_KEY";

// POST {"model", "prompt", "temperature", "max_tokens"[, "image_b64"]} -> {"text"}.
// The credential is read at construction, so a missing key fails before any
// request is sent.
class HttpCompletionClient final : public LlmClient {
 public:
  HttpCompletionClient(std::string url, const char* key_env, net::RetryPolicy policy = {});

  std::string complete(const CompletionRequest& request) override;
  std::string provider_tag() const override { return "http:" + client_.url(); }
  std::uint64_t calls() const override { return calls_.load(); }
  std::uint64_t http_attempts() const noexcept { return client_.attempts(); }

 private:
  net::JsonHttpClient client_;
  std::atomic<std::uint64_t> calls_{0};
};

class EchoLlm final : public LlmClient {
 public:
  std::string complete(const CompletionRequest& request) override;
  std::string provider_tag() const override { return "mock:echo"; }
  std::uint64_t calls() const override { return calls_.load(); }

 private:
  std::atomic<std::uint64_t> calls_{0};
};

// One detected shape feature and the domain phrases it may be rendered as.
struct OracleRule {
  std::string phrase;  // lowercase agnostic phrase to look for
  std::string group;   // regime or class name; one output phrase per group
  std::vector<std::string> domain;
};

// Default rules: the stock regime banks, the physics class banks, and the
// fixed phrases of the rule-based shape captioner.
std::vector<OracleRule> default_oracle_rules();

class ScriptedOracleLlm final : public LlmClient {
 public:
  ScriptedOracleLlm();
  explicit ScriptedOracleLlm(std::vector<OracleRule> rules);

  std::string complete(const CompletionRequest& request) override;
  std::string provider_tag() const override { return "mock:scripted-oracle"; }
  std::uint64_t calls() const override { return calls_.load(); }

 private:
  std::vector<OracleRule> rules_;
  std::atomic<std::uint64_t> calls_{0};
};

class CannedFileLlm final : public LlmClient {
 public:
  explicit CannedFileLlm(const std::filesystem::path& path);
  static std::unique_ptr<CannedFileLlm> from_text(std::string text);

  std::string complete(const CompletionRequest& request) override;
  std::string provider_tag() const override { return "mock:canned-file"; }
  std::uint64_t calls() const override { return calls_.load(); }

 private:
  CannedFileLlm() = default;
  std::string text_;
  std::atomic<std::uint64_t> calls_{0};
};

// The query caption a prompt asks to translate: the last "Generic:" line of
// an ICL prompt, or the quoted text of a zero-shot prompt. Empty if neither.
std::string extract_query_caption(std::string_view prompt);

bool is_mock_endpoint(std::string_view endpoint);

// Text completion provider for an endpoint (credential: TADACAP_LLM_API_KEY).
std::unique_ptr<LlmClient> make_llm_client(std::string_view endpoint, const net::RetryPolicy& policy = {});
// Multimodal provider (credential: TADACAP_MM_API_KEY).
std::unique_ptr<LlmClient> make_multimodal_client(std::string_view endpoint, const net::RetryPolicy& policy = {});

}  // namespace tadacap::llm
