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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tadacap/eval_metrics.hpp"

namespace tadacap::eval {
namespace {

using Refs = std::vector<std::string>;

TEST(Tokenize, LowercaseAndPunctuation) {
  EXPECT_EQ(tokenize("The Price, grows!  (fast)"), (std::vector<std::string>{"the", "price", "grows", "fast"}));
  EXPECT_TRUE(tokenize(" ... ").empty());
  EXPECT_EQ(tokenize("x-ray 3.5"), (std::vector<std::string>{"x", "ray", "3", "5"}));
  const TokenizedCaption c("A b.");
  EXPECT_EQ(c.original, "A b.");
  EXPECT_EQ(c.tokens, (std::vector<std::string>{"a", "b"}));
}

TEST(Rouge, HandCases) {
  EXPECT_NEAR(rouge_l("the price grows", Refs{"the price increases"}), 2.0 / 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(rouge_l("the price grows", Refs{"the price grows"}), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l("alpha beta", Refs{"gamma delta"}), 0.0);
  EXPECT_DOUBLE_EQ(rouge_l("", Refs{"gamma delta"}), 0.0);
  // Max over references.
  EXPECT_DOUBLE_EQ(rouge_l("a b c", Refs{"x y z", "a b c"}), 1.0);
}

TEST(Rouge, BetaWeighting) {
  // cand "a b" vs ref "a b c d": LCS 2, P = 1, R = 1/2.
  const double b2 = kRougeBeta * kRougeBeta;
  const double expected = (1.0 + b2) * 0.5 * 1.0 / (0.5 + b2 * 1.0);
  EXPECT_NEAR(rouge_l("a b", Refs{"a b c d"}), expected, 1e-12);
}

// Longest common subsequence by enumerating every subsequence of a.
std::size_t lcs_brute(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t j = 0, len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else {
        ++j;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len, int vocab) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> word(0, vocab - 1);
  std::vector<std::string> out(len(rng));
  for (auto& w : out) w = "w" + std::to_string(word(rng));
  return out;
}

std::string join(const std::vector<std::string>& t) {
  std::string s;
  for (const auto& w : t) s += (s.empty() ? "" : " ") + w;
  return s;
}

TEST(Rouge, LcsMatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto a = random_tokens(rng, 10, 4);
    const auto b = random_tokens(rng, 12, 4);
    ASSERT_EQ(lcs_length(a, b), lcs_brute(a, b)) << join(a) << " | " << join(b);
  }
}

TEST(Idf, Formula) {
  const std::vector<Refs> corpus{{"a b"}, {"c"}, {"c d"}, {"e", "c"}};
  const auto idf = compute_idf(corpus);
  EXPECT_EQ(idf.images, 4u);
  EXPECT_NEAR(idf.idf(1, "a"), std::log(4.0), 1e-12);
  EXPECT_NEAR(idf.idf(1, "a"), 1.386294, 1e-6);
  EXPECT_NEAR(idf.idf(1, "c"), std::log(4.0 / 3.0), 1e-12);
  const auto everywhere = compute_idf(std::vector<Refs>{{"q a"}, {"q"}, {"b q"}});
  EXPECT_EQ(everywhere.idf(1, "q"), 0.0);
  EXPECT_NEAR(idf.idf(2, "a b"), std::log(4.0), 1e-12);
  EXPECT_NEAR(idf.idf(1, "zzz"), std::log(4.0), 1e-12);  // unseen: df treated as 1
  EXPECT_EQ(idf.df[0].at("c"), 3u);  // one count per image even with two captions
  const auto single = compute_idf(std::vector<Refs>{{"a b c"}});
  EXPECT_EQ(single.idf(1, "a"), 0.0);
  EXPECT_THROW(compute_idf(std::vector<Refs>{}), std::exception);
  EXPECT_THROW(compute_idf(std::vector<Refs>{{"a"}, {}}), std::exception);
}

TEST(Cider, IdenticalCaptionScoresTen) {
  const std::vector<Refs> corpus{{"the price of the stock grows fast"}, {"velocity decays slowly over time"}};
  const auto idf = compute_idf(corpus);
  EXPECT_NEAR(cider_d("the price of the stock grows fast", corpus[0], idf), 10.0, 1e-9);
  EXPECT_DOUBLE_EQ(cider_d("completely unrelated words", corpus[0], idf), 0.0);
  EXPECT_DOUBLE_EQ(cider_d("", corpus[0], idf), 0.0);
}

TEST(Cider, ToyCorpusByHand) {
  // Image 1 "x y z", image 2 "x w": idf(x) = 0, every other n-gram log 2.
  const std::vector<Refs> corpus{{"x y z"}, {"x w"}};
  const auto idf = compute_idf(corpus);
  // "y z w" vs "x y z": unigram cos 2/sqrt(6), bigram 1/2, no trigram, equal length.
  EXPECT_NEAR(cider_d("y z w", corpus[0], idf), 2.5 * (2.0 / std::sqrt(6.0) + 0.5), 1e-6);
  // "y z" vs "x y z": unigram cos 1, bigram 1/sqrt(2), length gap 1.
  EXPECT_NEAR(cider_d("y z", corpus[0], idf), 2.5 * std::exp(-1.0 / 72.0) * (1.0 + 1.0 / std::sqrt(2.0)), 1e-6);
  // Clipping: repeated "y" does not earn more than the reference holds.
  EXPECT_LT(cider_d("y y y", corpus[0], idf), cider_d("y z", corpus[0], idf));
}

// Dense re-derivation of CIDEr-D from its definition.
double cider_oracle(const std::string& cand, const Refs& refs, const std::vector<Refs>& corpus) {
  const double m = static_cast<double>(corpus.size());
  auto grams = [](const std::vector<std::string>& t, std::size_t n) {
    std::map<std::string, double> c;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      std::string g;
      for (std::size_t j = 0; j < n; ++j) g += (j ? " " : "") + t[i + j];
      c[g] += 1.0;
    }
    return c;
  };
  auto idf = [&](std::size_t n, const std::string& g) {
    double df = 0.0;
    for (const auto& img : corpus) {
      bool seen = false;
      for (const auto& r : img) seen |= grams(tokenize(r), n).count(g) > 0;
      df += seen;
    }
    return std::log(m / std::max(df, 1.0));
  };
  const auto ct = tokenize(cand);
  if (ct.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    double sum = 0.0;
    for (const auto& r : refs) {
      const auto rt = tokenize(r);
      auto h = grams(ct, n), g = grams(rt, n);
      std::set<std::string> vocab;
      for (auto& [k, v] : h) vocab.insert(k);
      for (auto& [k, v] : g) vocab.insert(k);
      double dot = 0, nh = 0, nr = 0;
      for (const auto& k : vocab) {
        const double w = idf(n, k);
        const double a = h[k] * w, b = g[k] * w;
        dot += std::min(a, b) * b;
        nh += a * a;
        nr += b * b;
      }
      const double sim = (nh > 0 && nr > 0) ? dot / (std::sqrt(nh) * std::sqrt(nr)) : 0.0;
      const double d = static_cast<double>(ct.size()) - static_cast<double>(rt.size());
      sum += sim * std::exp(-d * d / 72.0);
    }
    total += 10.0 * sum / static_cast<double>(refs.size());
  }
  return total / 4.0;
}

TEST(Cider, MatchesDenseOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Refs> corpus(2 + rng() % 4);
    for (auto& img : corpus) {
      img.resize(1 + rng() % 3);
      for (auto& r : img) {
        auto t = random_tokens(rng, 7, 6);
        if (t.empty()) t.push_back("w0");
        r = join(t);
      }
    }
    const auto idf = compute_idf(corpus);
    const auto cand = join(random_tokens(rng, 8, 6));
    const auto& refs = corpus[rng() % corpus.size()];
    ASSERT_NEAR(cider_d(cand, refs, idf), cider_oracle(cand, refs, corpus), 1e-9) << cand;
  }
}

TEST(SpiceProxy, HandCases) {
  EXPECT_EQ(spice_proxy("the price grows", Refs{"the price increases"}), 0.5);
  EXPECT_EQ(spice_proxy("the price grows", Refs{"The price grows."}), 1.0);
  EXPECT_EQ(spice_proxy("velocity decays", Refs{"the price grows"}), 0.0);
  EXPECT_EQ(spice_proxy("", Refs{"the price grows"}), 0.0);
  // Union over references: {price, grow, increas} vs {price, grow}.
  EXPECT_NEAR(spice_proxy("price grows", Refs{"price increases", "it grows"}), 0.8, 1e-12);
}

TEST(SpiceProxy, Stemming) {
  EXPECT_EQ(stem("grows"), "grow");
  EXPECT_EQ(stem("growing"), "grow");
  EXPECT_EQ(stem("jumped"), "jump");
  EXPECT_EQ(stem("watches"), "watch");
  EXPECT_EQ(stem("boxes"), "boxe");  // "box" is below the 4-letter floor
  EXPECT_EQ(stem("increases"), "increas");
  EXPECT_EQ(stem("class"), "class");
  EXPECT_EQ(stem("ring"), "ring");   // would leave "r"
  EXPECT_EQ(stem("sped"), "sped");   // would leave 2 letters
  EXPECT_EQ(stem("shows"), "show");
  EXPECT_EQ(stem("gas"), "gas");
  EXPECT_EQ(kStopwordsVersion, "stopwords-v1");
  EXPECT_TRUE(stopwords().contains("the"));
  EXPECT_FALSE(stopwords().contains("price"));
  EXPECT_EQ(content_words("The prices are falling"), (std::set<std::string>{"price", "fall"}));
}

TEST(Spider, Midpoints) {
  EXPECT_DOUBLE_EQ(spider(10.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(spider(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(spider(5.0, 0.5), 0.5);
}

TEST(ScoreCaption, Consistent) {
  const std::vector<Refs> corpus{{"the stock price grows steadily"}, {"the price is flat"}};
  const auto idf = compute_idf(corpus);
  const auto s = score_caption("the stock price grows steadily", corpus[0], idf);
  EXPECT_DOUBLE_EQ(s.rouge_l, 1.0);
  EXPECT_NEAR(s.cider_d, 10.0, 1e-9);
  EXPECT_DOUBLE_EQ(s.spice, 1.0);
  EXPECT_NEAR(s.spider, 1.0, 1e-10);
}

TEST(Properties, RangesAndInvariants) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<Refs> corpus(1 + rng() % 4);
    for (auto& img : corpus) {
      img.resize(1 + rng() % 2);
      for (auto& r : img) r = join(random_tokens(rng, 9, 12));
    }
    const auto idf = compute_idf(corpus);
    const auto cand = join(random_tokens(rng, 9, 12));
    const auto& refs = corpus[rng() % corpus.size()];
    const auto s = score_caption(cand, refs, idf);
    ASSERT_GE(s.rouge_l, 0.0);
    ASSERT_LE(s.rouge_l, 1.0 + 1e-12);
    ASSERT_GE(s.cider_d, 0.0);
    ASSERT_LE(s.cider_d, 10.0 + 1e-9);
    ASSERT_GE(s.spice, 0.0);
    ASSERT_LE(s.spice, 1.0);
    ASSERT_NEAR(s.spider, (s.cider_d / 10.0 + s.spice) / 2.0, 1e-12);
    for (std::size_t n = 0; n < kMaxNgram; ++n) {
      for (const auto& [g, df] : idf.df[n]) {
        ASSERT_GE(df, 1u);
        ASSERT_GE(idf.idf(n + 1, g), 0.0);
      }
    }
    // Tokenization is idempotent.
    ASSERT_EQ(tokenize(join(tokenize(cand))), tokenize(cand));
    if (!tokenize(cand).empty()) ASSERT_DOUBLE_EQ(rouge_l(cand, Refs{cand}), 1.0);
  }
}

}  // namespace
}  // namespace tadacap::eval
