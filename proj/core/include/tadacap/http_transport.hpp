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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace tadacap::net {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double backoff_multiplier = 2.0;
  // Uniform jitter as a fraction of the nominal delay (0.2 -> +-20%).
  double jitter = 0.2;
  std::chrono::seconds timeout{60};
  // Injected so tests can run the retry loop without sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;

  // Nominal delay before retry number attempt (1-based), without jitter.
  std::chrono::milliseconds nominal_delay(int attempt) const;
};

// "http://host:port/path" split into the parts cpp-httplib wants.
struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always starts with '/'

  static Endpoint parse(std::string_view url);
};

// Reads a credential from the environment; ConfigError when unset or empty.
std::string require_env(const char* name);

// POSTs JSON bodies with bearer auth, retrying transport failures, 429 and
// 5xx responses with jittered exponential backoff.
class JsonHttpClient {
 public:
  JsonHttpClient(std::string url, std::string api_key, RetryPolicy policy = {});

  nlohmann::json post(const nlohmann::json& body) const;

  const std::string& url() const noexcept { return url_; }
  // Total HTTP attempts made so far, including retries.
  std::uint64_t attempts() const noexcept { return attempts_.load(); }

 private:
  std::string url_;
  Endpoint endpoint_;
  std::string api_key_;
  RetryPolicy policy_;
  mutable std::atomic<std::uint64_t> attempts_{0};
};

}  // namespace tadacap::net
