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
#include "tadacap/http_transport.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "tadacap/errors.hpp"
#include "tadacap/rng.hpp"

namespace tadacap::net {

std::chrono::milliseconds RetryPolicy::nominal_delay(int attempt) const {
  const double scale = std::pow(backoff_multiplier, std::max(0, attempt - 1));
  return std::chrono::milliseconds(static_cast<long long>(static_cast<double>(initial_backoff.count()) * scale));
}

Endpoint Endpoint::parse(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ConfigError("endpoint '" + std::string(url) + "' must start with http:// or https://");
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("endpoint '" + std::string(url) + "' has unsupported scheme '" + std::string(scheme) + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = std::string(url.substr(0, path_start));
  ep.path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
  if (ep.origin.size() <= scheme_end + 3) throw ConfigError("endpoint '" + std::string(url) + "' has no host");
  return ep;
}

std::string require_env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') {
    throw ConfigError(std::string("missing credentials: environment variable ") + name + " is not set");
  }
  return value;
}

JsonHttpClient::JsonHttpClient(std::string url, std::string api_key, RetryPolicy policy)
    : url_(std::move(url)), endpoint_(Endpoint::parse(url_)), api_key_(std::move(api_key)),
      policy_(std::move(policy)) {
  if (policy_.max_attempts < 1) throw ConfigError("retry policy needs at least one attempt");
}

nlohmann::json JsonHttpClient::post(const nlohmann::json& body) const {
  httplib::Client client(endpoint_.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout).count();
  client.set_connection_timeout(static_cast<time_t>(timeout), 0);
  client.set_read_timeout(static_cast<time_t>(timeout), 0);
  client.set_write_timeout(static_cast<time_t>(timeout), 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::minstd_rand jitter_rng(std::random_device{}());
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    attempts_.fetch_add(1);
    auto res = client.Post(endpoint_.path, headers, payload, "application/json");
    bool retriable = true;
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("malformed JSON response from " + url_ + ": " + e.what());
      }
    } else {
      last_error = "HTTP " + std::to_string(res->status);
      retriable = res->status == 429 || res->status >= 500;
    }
    if (!retriable) break;
    if (attempt < policy_.max_attempts) {
      const auto nominal = policy_.nominal_delay(attempt);
      std::uniform_real_distribution<double> jitter(1.0 - policy_.jitter, 1.0 + policy_.jitter);
      const auto delay = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(nominal.count()) * jitter(jitter_rng)));
      if (policy_.sleep) {
        policy_.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
  }
  throw TransportError("POST " + url_ + " failed: " + last_error);
}

}  // namespace tadacap::net
