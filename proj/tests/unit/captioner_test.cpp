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
#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "tadacap/agnostic_captioner.hpp"
#include "tadacap/errors.hpp"
#include "tadacap/synthgen.hpp"

namespace tadacap::caption {
namespace {

bool has(const std::string& s, std::string_view needle) { return s.find(needle) != std::string::npos; }

std::vector<double> line(std::size_t n, double a, double b) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = a + b * static_cast<double>(t);
  return x;
}

TEST(RuleCaption, IncreasingLineGrows) {
  const auto c = agnostic_caption_rule_based(line(100, 10.0, 0.5));
  EXPECT_EQ(c, "It grows. It has small variability.");
}

TEST(RuleCaption, DecreasingLine) {
  EXPECT_EQ(agnostic_caption_rule_based(line(64, 100.0, -1.0)), "It goes downward. It has small variability.");
}

TEST(RuleCaption, ConstantIsFlat) {
  EXPECT_EQ(agnostic_caption_rule_based(std::vector<double>(50, 3.0)), "It is flat. It has small variability.");
  EXPECT_EQ(agnostic_caption_rule_based(std::vector<double>(50, 0.0)), "It is flat. It has small variability.");
}

TEST(RuleCaption, PiecewiseRegions) {
  std::vector<double> x = line(60, 10.0, 1.0);
  const double top = x.back();
  x.resize(120, top);
  const auto s = describe_shape(x);
  ASSERT_FALSE(s.regions.empty());
  EXPECT_EQ(s.regions.front(), Direction::up);
  EXPECT_EQ(s.regions.back(), Direction::flat);
  EXPECT_EQ(render_caption(s), "It grows, then is flat. It has small variability.");

  std::vector<double> peak = line(60, 0.0, 1.0);
  for (double v : line(60, 59.0, -1.0)) peak.push_back(v);
  const auto p = describe_shape(peak);
  EXPECT_EQ(p.regions.front(), Direction::up);
  EXPECT_EQ(p.regions.back(), Direction::down);
  EXPECT_LE(p.regions.size(), 3u);
}

TEST(RuleCaption, HighSigmaRegime) {
  // Sigma at the top of the high-variability range.
  const auto& reg = synth::find_regime("sigma-high");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    synth::StockParams p;
    p.mean = 100.0;
    p.sigma = reg.ranges.sigma.hi;
    p.kappa = 0.03;
    p.shock_prob = 0.01;
    p.shock_sigma = 0.003;
    p.length = 128;
    p.seed = seed;
    const auto c = agnostic_caption_rule_based(synth::gen_stock_series(p));
    EXPECT_TRUE(has(c, "has strong variability")) << c;
  }
}

TEST(RuleCaption, LowSigmaIsSmall) {
  synth::StockParams p;
  p.mean = 100.0;
  p.sigma = 0.002;
  p.kappa = 0.003;
  p.length = 128;
  p.seed = 4;
  EXPECT_TRUE(has(agnostic_caption_rule_based(synth::gen_stock_series(p)), "has small variability"));
}

TEST(RuleCaption, FrequentJumps) {
  // Quiet zig-zag with a shock every 16 steps: 8 jumps in 128 points.
  std::vector<double> x(128);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = 100.0 + (t % 2 ? 0.05 : -0.05) + (t % 16 == 8 ? 6.0 : 0.0);
  const auto s = describe_shape(x);
  EXPECT_GE(s.jumps, 4u);
  EXPECT_TRUE(s.frequent_jumps);
  EXPECT_TRUE(has(render_caption(s), " and shows common jumps."));
  // A single outlier stays silent.
  std::vector<double> y(128, 100.0);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] += t % 2 ? 0.05 : -0.05;
  y[60] += 6.0;
  EXPECT_FALSE(describe_shape(y).frequent_jumps);
}

TEST(RuleCaption, RegimeAgreement) {
  // How often the describer names the generating regime's headline feature.
  const std::map<std::string, std::string> expect = {
      {"trend-up", "It grows"}, {"trend-down", "It goes downward"}, {"sigma-high", "strong variability"}};
  for (const auto& [name, phrase_text] : expect) {
    const auto& reg = synth::find_regime(name);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto draw = synth::sample_stock_regime(std::span(&reg, 1), seed);
      hits += has(agnostic_caption_rule_based(synth::gen_stock_series(draw.params)), phrase_text);
    }
    EXPECT_GE(hits, 90) << name;
  }
}

TEST(RuleCaption, ShortSeriesRejected) {
  EXPECT_THROW(agnostic_caption_rule_based(std::vector<double>(7, 1.0)), InvalidArgument);
  EXPECT_NO_THROW(agnostic_caption_rule_based(std::vector<double>(kMinRuleLength, 1.0)));
}

TEST(RuleCaption, DeterministicAndScaleFree) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(128, 0.0);
  for (std::size_t t = 1; t < x.size(); ++t) x[t] = x[t - 1] + g(rng);
  std::vector<double> shifted = x;
  for (double& v : shifted) v += 1000.0;
  EXPECT_EQ(agnostic_caption_rule_based(shifted), agnostic_caption_rule_based(shifted));
  EXPECT_EQ(describe_shape(x).regions, describe_shape(shifted).regions);
}

TEST(RuleCaption, EveryPhraseIsKnown) {
  std::set<std::string> known;
  for (const auto& p : rule_phrases()) known.insert(p.phrase);
  for (auto d : {Direction::down, Direction::flat, Direction::up}) EXPECT_TRUE(known.count(std::string(phrase(d))));
  for (auto v : {Volatility::low, Volatility::medium, Volatility::high}) {
    EXPECT_TRUE(known.count(std::string(phrase(v))));
  }
  EXPECT_TRUE(known.count(std::string(kFrequentJumpsPhrase)));
  // Phrases that also appear in the generator's agnostic banks.
  for (const char* name : {"trend-up", "trend-neutral", "sigma-high", "sigma-medium", "sigma-low", "shock-high"}) {
    const auto& bank = synth::find_regime(name).agnostic;
    bool any = false;
    for (const auto& p : rule_phrases()) {
      if (p.regime == name) any |= std::find(bank.begin(), bank.end(), p.phrase) != bank.end() ||
                                   std::find(bank.begin(), bank.end(), "it " + p.phrase) != bank.end();
    }
    EXPECT_TRUE(any) << name;
  }
}

class CountingClient : public llm::LlmClient {
 public:
  explicit CountingClient(std::string reply, std::chrono::milliseconds delay = {}) : reply_(std::move(reply)), delay_(delay) {}
  std::string complete(const llm::CompletionRequest& r) override {
    ++calls_;
    {
      std::lock_guard lock(mu_);
      prompts_.push_back(r.prompt);
      image_sizes_.push_back(r.image.size());
    }
    if (delay_.count()) std::this_thread::sleep_for(delay_);
    if (fail_next_.exchange(false)) throw TransportError("boom");
    return reply_;
  }
  std::string provider_tag() const override { return "counting"; }
  std::uint64_t calls() const override { return calls_.load(); }
  void fail_next() { fail_next_ = true; }

  std::mutex mu_;
  std::vector<std::string> prompts_;
  std::vector<std::size_t> image_sizes_;

 private:
  std::string reply_;
  std::chrono::milliseconds delay_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<bool> fail_next_{false};
};

std::vector<std::uint8_t> image(std::uint8_t tag) { return {0x89, 'P', 'N', 'G', tag}; }

TEST(ExternalCaptioner, TrimsAndSendsInstruction) {
  CountingClient client("  It grows steadily.\n\nExtra paragraph.  ");
  ExternalCaptioner cap(client);
  EXPECT_EQ(cap.caption(image(1)), "It grows steadily.");
  ASSERT_EQ(client.prompts_.size(), 1u);
  EXPECT_EQ(client.prompts_[0], "Describe the generic shape of the time-series in this image, without domain context.");
  EXPECT_EQ(client.image_sizes_[0], 5u);
}

TEST(ExternalCaptioner, RepeatedImageOneCall) {
  CountingClient client("It is flat.");
  ExternalCaptioner cap(client);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(cap.caption(image(7)), "It is flat.");
  EXPECT_EQ(client.calls(), 1u);
  EXPECT_EQ(cap.upstream_calls(), 1u);
  (void)cap.caption(image(8));
  EXPECT_EQ(cap.cache_size(), 2u);
}

TEST(ExternalCaptioner, EmptyOutputIsAnError) {
  CountingClient client(" \n ");
  ExternalCaptioner cap(client);
  try {
    cap.caption(image(1));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_TRUE(has(e.what(), "empty caption"));
  }
}

TEST(ExternalCaptioner, FailuresAreNotCached) {
  CountingClient client("It grows.");
  ExternalCaptioner cap(client);
  client.fail_next();
  EXPECT_THROW(cap.caption(image(2)), TransportError);
  EXPECT_EQ(cap.caption(image(2)), "It grows.");
  EXPECT_EQ(client.calls(), 2u);
}

TEST(ExternalCaptioner, ConcurrentCallsBoundedByDistinctImages) {
  CountingClient client("It grows.", std::chrono::milliseconds(20));
  ExternalCaptioner cap(client);
  std::vector<std::thread> threads;
  for (int t = 0; t < 16; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 4; ++i) EXPECT_EQ(cap.caption(image(static_cast<std::uint8_t>((t + i) % 3))), "It grows.");
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_LE(client.calls(), 3u);
  EXPECT_EQ(cap.cache_size(), 3u);
}

}  // namespace
}  // namespace tadacap::caption
