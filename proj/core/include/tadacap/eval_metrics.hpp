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

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Caption metrics: ROUGE-L, CIDEr-D, a content-word F1 stand-in for SPICE
// ("SPICE-proxy") and SPIDEr.
namespace tadacap::eval {

// Lowercase, anything but [a-z0-9] becomes a separator.
std::vector<std::string> tokenize(std::string_view text);

struct TokenizedCaption {
  std::string original;
  std::vector<std::string> tokens;

  explicit TokenizedCaption(std::string text);
};

inline constexpr double kRougeBeta = 1.2;

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// Max over references of the LCS F-measure; 0 for an empty candidate.
double rouge_l(std::string_view candidate, std::span<const std::string> refs, double beta = kRougeBeta);

inline constexpr std::size_t kMaxNgram = 4;
using Ngram = std::string;  // tokens joined by single spaces
using NgramCounts = std::map<Ngram, std::size_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n);

// Document frequencies over images (a reference set counts once per image).
struct CorpusIdf {
  std::size_t images = 0;
  std::array<std::map<Ngram, std::size_t>, kMaxNgram> df;

  // log(images / max(df, 1)); n-grams never seen in the references get the
  // df = 1 weight.
  double idf(std::size_t n, const Ngram& gram) const;
};

// Throws InvalidArgument for an empty corpus or an image with no references.
CorpusIdf compute_idf(std::span<const std::vector<std::string>> refs_by_image);

inline constexpr double kCiderSigma = 6.0;

// CIDEr-D in [0, 10]: clipped TF-IDF cosine with Gaussian length penalty,
// times 10, averaged over references and n = 1..n_max.
double cider_d(std::string_view candidate, std::span<const std::string> refs, const CorpusIdf& idf,
               std::size_t n_max = kMaxNgram, double sigma = kCiderSigma);

inline constexpr std::string_view kStopwordsVersion = "stopwords-v1";
const std::set<std::string, std::less<>>& stopwords();

// Strips -ing / -ed / -es (after s, x, z, ch, sh) / -s (not -ss) while at
// least four letters remain.
std::string stem(std::string_view word);

std::set<std::string> content_words(std::string_view text);

// F1 between the candidate's content words and the union over references.
double spice_proxy(std::string_view candidate, std::span<const std::string> refs);

// Mean of CIDEr-D / 10 and SPICE-proxy.
double spider(double cider, double spice);

struct CaptionScores {
  double rouge_l = 0.0;
  double cider_d = 0.0;
  double spice = 0.0;
  double spider = 0.0;
};

CaptionScores score_caption(std::string_view candidate, std::span<const std::string> refs, const CorpusIdf& idf);

}  // namespace tadacap::eval
