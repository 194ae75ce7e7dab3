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
#include "tadacap/providers.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "tadacap/agnostic_captioner.hpp"
#include "tadacap/catalog.hpp"
#include "tadacap/digest.hpp"
#include "tadacap/errors.hpp"
#include "tadacap/synthgen.hpp"

namespace tadacap::llm {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    out.push_back(text.substr(start, end - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

constexpr std::string_view kGeneric = "Generic:";
constexpr std::string_view kInDomain = "In-domain:";

}  // namespace

HttpCompletionClient::HttpCompletionClient(std::string url, const char* key_env, net::RetryPolicy policy)
    : client_(std::move(url), net::require_env(key_env), std::move(policy)) {}

std::string HttpCompletionClient::complete(const CompletionRequest& request) {
  ++calls_;
  nlohmann::json body = {{"model", request.model},
                         {"prompt", request.prompt},
                         {"temperature", request.temperature},
                         {"max_tokens", request.max_tokens}};
  if (!request.image.empty()) body["image_b64"] = base64_encode(request.image);
  const nlohmann::json response = client_.post(body);
  if (!response.is_object() || !response.contains("text") || !response["text"].is_string()) {
    throw FormatError("completion response from " + client_.url() + " lacks a string \"text\" field");
  }
  return response["text"].get<std::string>();
}

std::string EchoLlm::complete(const CompletionRequest& request) {
  ++calls_;
  const auto all = lines(request.prompt);
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    const auto line = trim(*it);
    if (line.empty() || line == kInDomain) continue;
    return std::string(line);
  }
  return {};
}

std::string extract_query_caption(std::string_view prompt) {
  const auto all = lines(prompt);
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    const auto line = trim(*it);
    if (line.starts_with(kGeneric)) return std::string(trim(line.substr(kGeneric.size())));
  }
  constexpr std::string_view open = "description '";
  constexpr std::string_view close = "' in the context of";
  const auto b = prompt.find(open);
  if (b != std::string_view::npos) {
    const auto start = b + open.size();
    const auto e = prompt.rfind(close);
    if (e != std::string_view::npos && e >= start) return std::string(prompt.substr(start, e - start));
  }
  return {};
}

std::vector<OracleRule> default_oracle_rules() {
  std::vector<OracleRule> rules;
  for (const auto& r : synth::stock_catalog()) {
    for (const auto& a : r.agnostic) rules.push_back({lower(a), r.name, r.domain});
  }
  for (const auto& c : synth::physics_catalog().classes) {
    for (const auto& a : c.agnostic) rules.push_back({lower(a), c.name, c.velocity});
  }
  for (const auto& p : caption::rule_phrases()) {
    rules.push_back({lower(p.phrase), p.regime, synth::find_regime(p.regime).domain});
  }
  return rules;
}

ScriptedOracleLlm::ScriptedOracleLlm() : ScriptedOracleLlm(default_oracle_rules()) {}

ScriptedOracleLlm::ScriptedOracleLlm(std::vector<OracleRule> rules) : rules_(std::move(rules)) {
  // Longest phrase first so "it grows exponentially" beats "it grows".
  std::stable_sort(rules_.begin(), rules_.end(),
                   [](const OracleRule& a, const OracleRule& b) { return a.phrase.size() > b.phrase.size(); });
}

std::string ScriptedOracleLlm::complete(const CompletionRequest& request) {
  ++calls_;
  const std::string query = lower(extract_query_caption(request.prompt));
  if (query.empty()) return {};

  std::vector<std::string> examples;
  for (const auto line : lines(request.prompt)) {
    const auto t = trim(line);
    if (t.starts_with(kInDomain) && t.size() > kInDomain.size()) {
      examples.push_back(lower(trim(t.substr(kInDomain.size()))));
    }
  }

  struct Hit {
    std::size_t pos;
    std::size_t len;
    const OracleRule* rule;
  };
  std::vector<Hit> hits;
  std::vector<bool> taken(query.size(), false);
  for (const auto& rule : rules_) {
    if (rule.phrase.empty()) continue;
    for (auto pos = query.find(rule.phrase); pos != std::string::npos; pos = query.find(rule.phrase, pos + 1)) {
      const auto end = pos + rule.phrase.size();
      if (std::any_of(taken.begin() + pos, taken.begin() + end, [](bool b) { return b; })) continue;
      std::fill(taken.begin() + pos, taken.begin() + end, true);
      hits.push_back({pos, rule.phrase.size(), &rule});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.pos < b.pos; });

  std::vector<std::string> groups;
  std::string out;
  for (const auto& h : hits) {
    if (std::find(groups.begin(), groups.end(), h.rule->group) != groups.end()) continue;
    groups.push_back(h.rule->group);
    if (h.rule->domain.empty()) continue;
    const std::string* chosen = &h.rule->domain.front();
    for (const auto& d : h.rule->domain) {
      const std::string ld = lower(d);
      if (std::any_of(examples.begin(), examples.end(),
                      [&](const std::string& e) { return e.find(ld) != std::string::npos; })) {
        chosen = &d;
        break;
      }
    }
    if (!out.empty()) out += ' ';
    out += synth::sentence(*chosen);
  }
  return out;
}

CannedFileLlm::CannedFileLlm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read canned response file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  text_ = ss.str();
}

std::unique_ptr<CannedFileLlm> CannedFileLlm::from_text(std::string text) {
  std::unique_ptr<CannedFileLlm> out(new CannedFileLlm());
  out->text_ = std::move(text);
  return out;
}

std::string CannedFileLlm::complete(const CompletionRequest&) {
  ++calls_;
  return text_;
}

bool is_mock_endpoint(std::string_view endpoint) { return endpoint.starts_with("mock:"); }

namespace {

std::unique_ptr<LlmClient> make_client(std::string_view endpoint, const net::RetryPolicy& policy,
                                       const char* key_env) {
  if (endpoint == "mock:echo") return std::make_unique<EchoLlm>();
  if (endpoint == "mock:scripted-oracle") return std::make_unique<ScriptedOracleLlm>();
  constexpr std::string_view canned = "mock:canned-file:";
  if (endpoint.starts_with(canned)) {
    return std::make_unique<CannedFileLlm>(std::filesystem::path(endpoint.substr(canned.size())));
  }
  if (is_mock_endpoint(endpoint)) {
    throw ConfigError("unknown mock provider '" + std::string(endpoint) +
                      "' (mock:echo | mock:scripted-oracle | mock:canned-file:<path>)");
  }
  return std::make_unique<HttpCompletionClient>(std::string(endpoint), key_env, policy);
}

}  // namespace

std::unique_ptr<LlmClient> make_llm_client(std::string_view endpoint, const net::RetryPolicy& policy) {
  return make_client(endpoint, policy, kLlmKeyEnv);
}

std::unique_ptr<LlmClient> make_multimodal_client(std::string_view endpoint, const net::RetryPolicy& policy) {
  return make_client(endpoint, policy, kMultimodalKeyEnv);
}

}  // namespace tadacap::llm
