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
#include "tadacap/agnostic_captioner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>

#include "tadacap/digest.hpp"
#include "tadacap/errors.hpp"
#include "tadacap/prompts.hpp"
#include "tadacap/series_stats.hpp"

namespace tadacap::caption {
namespace {

// A region trends when its fitted change clears twice the random-walk
// spread of the step noise over the same span.
double fitted_change(std::span<const double> x) {
  return stats::fit_line(x).slope * (static_cast<double>(x.size()) - 1.0);
}

Direction classify(std::span<const double> x, double noise, double scale) {
  const double n = static_cast<double>(x.size());
  const double change = fitted_change(x);
  const double threshold = std::max(2.0 * noise * std::sqrt(n), 1e-6 * scale);
  if (change > threshold) return Direction::up;
  if (change < -threshold) return Direction::down;
  return Direction::flat;
}

bool opposite(Direction a, Direction b) {
  return (a == Direction::up && b == Direction::down) || (a == Direction::down && b == Direction::up);
}

// Jumps count as frequent above roughly 3 per 100 steps, and never for
// fewer than 4, so isolated noise outliers stay silent.
bool frequent(std::size_t jumps, std::size_t n) {
  return jumps >= std::max<std::size_t>(4, (3 * n + 99) / 100);
}

}  // namespace

ShapeSummary describe_shape(std::span<const double> x) {
  if (x.size() < kMinRuleLength) {
    throw InvalidArgument("shape caption needs at least " + std::to_string(kMinRuleLength) + " points, got " +
                          std::to_string(x.size()));
  }
  ShapeSummary s;
  const double noise = stats::step_noise(x);
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, 1.0);

  const Direction whole = classify(x, noise, scale);
  const std::size_t n = x.size();
  const std::size_t cut1 = n / 3;
  const std::size_t cut2 = 2 * n / 3;
  const std::array<std::span<const double>, 3> parts = {x.subspan(0, cut1 + 1), x.subspan(cut1, cut2 - cut1 + 1),
                                                        x.subspan(cut2)};
  std::array<Direction, 3> thirds{};
  for (std::size_t i = 0; i < 3; ++i) thirds[i] = classify(parts[i], noise, scale);
  const bool disagree = std::any_of(thirds.begin(), thirds.end(), [&](Direction d) { return opposite(d, whole); });
  // A flat third splits a trend only when the trend stands well clear of the
  // noise and that third is nearly still next to the trend's pace.
  const double change = std::abs(fitted_change(x));
  const bool clear_trend = change >= 3.0 * 2.0 * noise * std::sqrt(static_cast<double>(n));
  bool plateau = false;
  for (std::size_t i = 0; i < 3 && clear_trend; ++i) {
    plateau |= thirds[i] == Direction::flat && std::abs(fitted_change(parts[i])) < 0.05 * change;
  }
  if (whole != Direction::flat && !disagree && !plateau) {
    s.regions = {whole};
  } else {
    for (Direction d : thirds) {
      if (s.regions.empty() || s.regions.back() != d) s.regions.push_back(d);
    }
  }

  s.relative_noise = stats::relative_step_noise(x);
  s.volatility = s.relative_noise >= kHighNoise     ? Volatility::high
                 : s.relative_noise >= kMediumNoise ? Volatility::medium
                                                    : Volatility::low;
  s.jumps = stats::jump_count(x);
  s.frequent_jumps = frequent(s.jumps, n);
  return s;
}

std::string_view phrase(Direction d) {
  switch (d) {
    case Direction::up: return "grows";
    case Direction::flat: return "is flat";
    case Direction::down: return "goes downward";
  }
  return "is flat";
}

std::string_view phrase(Volatility v) {
  switch (v) {
    case Volatility::high: return "has strong variability";
    case Volatility::medium: return "has moderate variability";
    case Volatility::low: return "has small variability";
  }
  return "has small variability";
}

std::string render_caption(const ShapeSummary& s) {
  std::string out = "It ";
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    if (i > 0) out += ", then ";
    out += phrase(s.regions[i]);
  }
  out += ". It ";
  out += phrase(s.volatility);
  if (s.frequent_jumps) {
    out += " and ";
    out += kFrequentJumpsPhrase;
  }
  out += '.';
  return out;
}

std::string agnostic_caption_rule_based(std::span<const double> series) {
  return render_caption(describe_shape(series));
}

const std::vector<RulePhrase>& rule_phrases() {
  static const std::vector<RulePhrase> table = {
      {std::string(phrase(Direction::up)), "trend-up"},
      {std::string(phrase(Direction::flat)), "trend-neutral"},
      {std::string(phrase(Direction::down)), "trend-down"},
      {std::string(phrase(Volatility::high)), "sigma-high"},
      {std::string(phrase(Volatility::medium)), "sigma-medium"},
      {std::string(phrase(Volatility::low)), "sigma-low"},
      {std::string(kFrequentJumpsPhrase), "shock-high"},
  };
  return table;
}

ExternalCaptioner::ExternalCaptioner(llm::LlmClient& client, std::string model)
    : client_(&client), model_(std::move(model)) {}

std::string ExternalCaptioner::caption(std::span<const std::uint8_t> png) {
  const std::string key = sha256_hex(png);
  std::promise<std::string> promise;
  std::shared_future<std::string> pending;
  bool owner = false;
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, promise.get_future().share()).first;
      ++upstream_calls_;
      owner = true;
    }
    pending = it->second;
  }
  if (!owner) return pending.get();
  try {
    llm::CompletionRequest req;
    req.model = model_;
    req.prompt = std::string(kAgnosticInstruction);
    req.image.assign(png.begin(), png.end());
    std::string text = prompts::postprocess(client_->complete(req));
    if (text.empty()) throw FormatError("empty caption from " + client_->provider_tag());
    promise.set_value(text);
    return text;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mu_);
    cache_.erase(key);
    throw;
  }
}

std::uint64_t ExternalCaptioner::upstream_calls() const {
  std::lock_guard lock(mu_);
  return upstream_calls_;
}

std::size_t ExternalCaptioner::cache_size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

}  // namespace tadacap::caption
