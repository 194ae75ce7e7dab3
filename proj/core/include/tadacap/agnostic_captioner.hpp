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
#include <future>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tadacap/providers.hpp"

// Domain-agnostic shape captions: a deterministic rule-based describer and
// a cached wrapper around an external multimodal model.
namespace tadacap::caption {

inline constexpr std::size_t kMinRuleLength = 8;

enum class Direction { down, flat, up };
enum class Volatility { low, medium, high };

struct ShapeSummary {
  // At most three monotone regions, in time order.
  std::vector<Direction> regions;
  Volatility volatility = Volatility::low;
  double relative_noise = 0.0;
  std::size_t jumps = 0;
  bool frequent_jumps = false;
};

// relative_step_noise thresholds.
inline constexpr double kHighNoise = 0.02;
inline constexpr double kMediumNoise = 0.005;

ShapeSummary describe_shape(std::span<const double> series);

std::string_view phrase(Direction d);
std::string_view phrase(Volatility v);
inline constexpr std::string_view kFrequentJumpsPhrase = "shows common jumps";

// Renders a summary: "It grows, then is flat. It has small variability."
std::string render_caption(const ShapeSummary& s);

// Throws InvalidArgument for series shorter than kMinRuleLength.
std::string agnostic_caption_rule_based(std::span<const double> series);

// Every phrase render_caption can emit, with the stock regime it signals.
struct RulePhrase {
  std::string phrase;
  std::string regime;
};
const std::vector<RulePhrase>& rule_phrases();

inline constexpr std::string_view kAgnosticInstruction =
    "Describe the generic shape of the time-series in this image, without domain context.";

// Sends kAgnosticInstruction plus the image; results are cached by the
// SHA-256 of the image bytes so each distinct image costs one call.
class ExternalCaptioner {
 public:
  ExternalCaptioner(llm::LlmClient& client, std::string model = "default");

  // Trimmed first paragraph; FormatError("empty caption") when blank.
  std::string caption(std::span<const std::uint8_t> png);

  std::uint64_t upstream_calls() const;
  std::size_t cache_size() const;
  std::string provider_tag() const { return client_->provider_tag(); }

 private:
  llm::LlmClient* client_;
  std::string model_;
  mutable std::mutex mu_;
  // In-flight requests are shared, so concurrent callers wait instead of
  // sending a duplicate.
  std::map<std::string, std::shared_future<std::string>> cache_;
  std::uint64_t upstream_calls_ = 0;
};

}  // namespace tadacap::caption
