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
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tadacap/embeddings.hpp"

// Diverse subset selection with a determinantal point process over the
// cosine-similarity kernel L, plus the nearest-neighbour and random
// strategies used as ablations.
namespace tadacap::dpp {

enum class Strategy { diverse, nearest_neighbor, random };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

// Ordered selection. For Strategy::diverse gains[t] is the marginal
// log-det gain (nats) of step t; other strategies leave gains empty.
struct SubsetSelection {
  std::vector<std::size_t> indices;
  std::vector<double> gains;
  Strategy strategy = Strategy::diverse;
  std::optional<std::uint64_t> seed;

  bool operator==(const SubsetSelection&) const = default;
};

nlohmann::json to_json(const SubsetSelection& s);
SubsetSelection selection_from_json(const nlohmann::json& j);

inline constexpr double kDefaultEpsilon = 1e-10;
inline const double kDefaultGainThreshold = std::log(0.5);
// Relative tolerance under which two residuals (greedy) or determinants
// (brute force) count as tied.
inline constexpr double kTieTolerance = 1e-12;
// log det(L_S) at or below this is treated as singular.
inline constexpr double kSingularLogDet = -700.0;

// log det of a symmetric positive definite matrix via Cholesky.
// Returns -infinity when the factorization breaks down.
double log_det_spd(const Eigen::MatrixXd& m);

// Principal submatrix L_S in subset order.
Eigen::MatrixXd principal_minor(const Eigen::MatrixXd& L, std::span<const std::size_t> subset);

// log P(S) = log det(L_S) - log det(L + I). The empty subset has det 1.
// Throws DomainError (carrying the subset) when L_S is singular.
double dpp_log_prob(const Eigen::MatrixXd& L, std::span<const std::size_t> subset);
inline double dpp_log_prob(const embed::SimilarityKernel& k, std::span<const std::size_t> subset) {
  return dpp_log_prob(k.entries, subset);
}

// Fast greedy MAP with incremental Cholesky updates, O(n k^2).
// Each step takes the unselected item with the largest residual d^2
// (lowest index among residuals within kTieTolerance of it) and stops
// early once that maximum is <= epsilon.
SubsetSelection greedy_map_select(const Eigen::MatrixXd& L, std::size_t k, double epsilon = kDefaultEpsilon);
inline SubsetSelection greedy_map_select(const embed::SimilarityKernel& k, std::size_t count,
                                         double epsilon = kDefaultEpsilon) {
  return greedy_map_select(k.entries, count, epsilon);
}

// Greedy selection truncated at the first step whose gain falls below
// gain_threshold, or at k_max.
SubsetSelection auto_k(const Eigen::MatrixXd& L, double gain_threshold, std::size_t k_max,
                       double epsilon = kDefaultEpsilon);
inline SubsetSelection auto_k(const embed::SimilarityKernel& k, double gain_threshold, std::size_t k_max,
                              double epsilon = kDefaultEpsilon) {
  return auto_k(k.entries, gain_threshold, k_max, epsilon);
}

// Exhaustive argmax of det(L_S) over |S| = k; ties resolve to the
// lexicographically smallest index tuple. Refuses when C(n, k) > budget.
std::vector<std::size_t> brute_force_map(const Eigen::MatrixXd& L, std::size_t k,
                                         std::uint64_t budget = 1'000'000);

// Top-k cosine neighbours of query, descending, lowest index on ties.
// Items sharing the query's non-empty item_id are skipped.
std::vector<std::size_t> nn_select(std::span<const embed::EmbeddingVector> items,
                                   const embed::EmbeddingVector& query, std::size_t k);

// k distinct indices from a seeded Fisher-Yates prefix.
std::vector<std::size_t> random_select(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace tadacap::dpp
