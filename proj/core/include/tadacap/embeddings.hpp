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

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tadacap::embed {

struct EmbeddingVector {
  std::string item_id;
  std::vector<double> values;
  std::string provider_tag;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

// Scales values to unit Euclidean norm. Throws InvalidArgument for
// non-finite entries or a zero vector.
void normalize(EmbeddingVector& v);

double cosine(std::span<const double> a, std::span<const double> b);

// Built-in featurizer layout (d = 32). All blocks except the last two are
// computed on the min-max normalized series against time rescaled to [0, 1],
// so they are unchanged by positive affine maps a*s + b.
//   [0, 4)   mean, std, argmin and argmax time of the normalized series
//   [4]      least-squares slope of the whole series
//   [5, 13)  means of 8 equal segments minus the overall mean, times 2
//   [13, 21) autocorrelation at lags 1..8
//   [21, 29) log(1 + energy) in 8 equal DFT frequency bins (mean removed)
//   [29]     large-jump count divided by length
//   [30]     increment sign balance (ups - downs) / (n - 1)
//   [31]     smoothness 1 / (1 + 20 * relative step noise); never zero
namespace feature {
inline constexpr std::size_t kDim = 32;
inline constexpr std::size_t kLevel = 0;
inline constexpr std::size_t kSlope = 4;
inline constexpr std::size_t kSegmentMeans = 5;
inline constexpr std::size_t kAutocorr = 13;
inline constexpr std::size_t kSpectrum = 21;
inline constexpr std::size_t kJumps = 29;
inline constexpr std::size_t kSignBalance = 30;
inline constexpr std::size_t kSmoothness = 31;
inline constexpr std::size_t kSegments = 8;
inline constexpr std::size_t kLags = 8;
inline constexpr std::size_t kBins = 8;
inline constexpr std::size_t kMinLength = 8;
}  // namespace feature

struct FeatureConfig {
  double jump_factor = 4.0;
  std::string provider_tag = "builtin-features-v2";
};

// Raw 32 features before L2 normalization.
std::array<double, feature::kDim> raw_features(std::span<const double> series,
                                               const FeatureConfig& config = {});

// Deterministic featurizer; the result is L2-normalized.
EmbeddingVector builtin_featurize(std::span<const double> series,
                                  const FeatureConfig& config = {},
                                  std::string item_id = {});

// Cosine-similarity Gram matrix over unit vectors (the DPP kernel L).
struct SimilarityKernel {
  std::vector<std::string> item_ids;
  Eigen::MatrixXd entries;

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

// entries(i, j) = <x_i, x_j>, diagonal forced to 1, symmetric by construction.
SimilarityKernel build_kernel(std::span<const EmbeddingVector> embeddings);

}  // namespace tadacap::embed
