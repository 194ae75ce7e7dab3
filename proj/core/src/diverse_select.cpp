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
#include "tadacap/diverse_select.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "tadacap/errors.hpp"
#include "tadacap/rng.hpp"

namespace tadacap::dpp {
namespace {

std::string format_subset(std::span<const std::size_t> subset) {
  std::string s = "{";
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(subset[i]);
  }
  return s + "}";
}

void check_square(const Eigen::MatrixXd& L, const char* op) {
  if (L.rows() != L.cols()) throw InvalidArgument(std::string(op) + ": kernel must be square");
}

// Number of k-subsets of n, saturating (slightly early) at max uint64.
std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t f = n - k + i;
    if (r > kMax / f) return kMax;
    r = r * f / i;
  }
  return r;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::diverse: return "diverse";
    case Strategy::nearest_neighbor: return "nearest-neighbor";
    case Strategy::random: return "random";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "diverse") return Strategy::diverse;
  if (name == "nearest-neighbor" || name == "nn") return Strategy::nearest_neighbor;
  if (name == "random") return Strategy::random;
  throw InvalidArgument("unknown selection strategy '" + std::string(name) + "'");
}

nlohmann::json to_json(const SubsetSelection& s) {
  nlohmann::json j = {
      {"strategy", to_string(s.strategy)},
      {"indices", s.indices},
      {"gains", s.gains},
  };
  j["seed"] = s.seed ? nlohmann::json(*s.seed) : nlohmann::json(nullptr);
  return j;
}

SubsetSelection selection_from_json(const nlohmann::json& j) {
  SubsetSelection s;
  s.strategy = parse_strategy(j.at("strategy").get<std::string>());
  s.indices = j.at("indices").get<std::vector<std::size_t>>();
  s.gains = j.at("gains").get<std::vector<double>>();
  if (j.contains("seed") && !j["seed"].is_null()) s.seed = j["seed"].get<std::uint64_t>();
  return s;
}

double log_det_spd(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const auto diag = llt.matrixLLT().diagonal();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += std::log(diag(i));
  }
  return 2.0 * acc;
}

Eigen::MatrixXd principal_minor(const Eigen::MatrixXd& L, std::span<const std::size_t> subset) {
  const auto m = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      out(a, b) = L(static_cast<Eigen::Index>(subset[static_cast<std::size_t>(a)]),
                    static_cast<Eigen::Index>(subset[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

double dpp_log_prob(const Eigen::MatrixXd& L, std::span<const std::size_t> subset) {
  check_square(L, "dpp_log_prob");
  const auto n = static_cast<std::size_t>(L.rows());
  std::vector<char> seen(n, 0);
  for (std::size_t i : subset) {
    if (i >= n) throw InvalidArgument("dpp_log_prob: index " + std::to_string(i) + " out of range");
    if (seen[i]) throw InvalidArgument("dpp_log_prob: duplicate index " + std::to_string(i));
    seen[i] = 1;
  }
  const double numerator = log_det_spd(principal_minor(L, subset));
  if (!(numerator > kSingularLogDet)) {
    throw DomainError("dpp_log_prob: singular principal minor for subset " + format_subset(subset),
                      std::vector<std::size_t>(subset.begin(), subset.end()));
  }
  const Eigen::MatrixXd shifted = L + Eigen::MatrixXd::Identity(L.rows(), L.cols());
  return numerator - log_det_spd(shifted);
}

SubsetSelection greedy_map_select(const Eigen::MatrixXd& L, std::size_t k, double epsilon) {
  check_square(L, "greedy_map_select");
  const auto n = static_cast<std::size_t>(L.rows());
  if (k == 0) throw InvalidArgument("greedy_map_select: k must be at least 1");
  if (k > n) {
    throw InvalidArgument("greedy_map_select: k = " + std::to_string(k) + " exceeds item count " + std::to_string(n));
  }
  if (!(epsilon >= 0.0)) throw InvalidArgument("greedy_map_select: epsilon must be non-negative");

  SubsetSelection out;
  out.strategy = Strategy::diverse;
  out.indices.reserve(k);
  out.gains.reserve(k);

  // d2[i]: squared residual of item i against the span of the selection,
  // i.e. the Schur complement L_ii - L_iS L_S^-1 L_Si. Row i of c holds the
  // partial Cholesky factor of item i against the selected items.
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  std::vector<char> selected(n, 0);

  for (std::size_t step = 0; step < k; ++step) {
    double max_d2 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!selected[i]) max_d2 = std::max(max_d2, d2[i]);
    }
    if (!(max_d2 > epsilon)) break;
    // Residuals equal in exact arithmetic can differ by rounding in the
    // updates below; treat those as ties so the lowest index wins.
    std::size_t best = n;
    for (std::size_t i = 0; i < n && best == n; ++i) {
      if (!selected[i] && d2[i] >= max_d2 - kTieTolerance * max_d2) best = i;
    }
    const double best_d2 = d2[best];

    selected[best] = 1;
    out.indices.push_back(best);
    out.gains.push_back(std::log(best_d2));

    const double dj = std::sqrt(best_d2);
    const auto j = static_cast<Eigen::Index>(best);
    const auto t = static_cast<Eigen::Index>(step);
    for (std::size_t i = 0; i < n; ++i) {
      if (selected[i]) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const double e = (L(j, ii) - c.row(j).head(t).dot(c.row(ii).head(t))) / dj;
      c(ii, t) = e;
      d2[i] -= e * e;
    }
  }
  return out;
}

SubsetSelection auto_k(const Eigen::MatrixXd& L, double gain_threshold, std::size_t k_max, double epsilon) {
  if (std::isnan(gain_threshold) || gain_threshold == -std::numeric_limits<double>::infinity()) {
    throw InvalidArgument("auto_k: gain threshold must be a finite number");
  }
  if (k_max > static_cast<std::size_t>(L.rows())) {
    throw InvalidArgument("auto_k: k_max = " + std::to_string(k_max) + " exceeds item count " +
                          std::to_string(L.rows()));
  }
  SubsetSelection s = greedy_map_select(L, k_max, epsilon);
  std::size_t keep = 0;
  while (keep < s.gains.size() && s.gains[keep] >= gain_threshold) ++keep;
  s.indices.resize(keep);
  s.gains.resize(keep);
  return s;
}

std::vector<std::size_t> brute_force_map(const Eigen::MatrixXd& L, std::size_t k, std::uint64_t budget) {
  check_square(L, "brute_force_map");
  const auto n = static_cast<std::size_t>(L.rows());
  if (k == 0 || k > n) throw InvalidArgument("brute_force_map: need 1 <= k <= n");
  const std::uint64_t combos = choose(n, k);
  if (combos > budget) {
    throw InvalidArgument("brute_force_map: C(" + std::to_string(n) + ", " + std::to_string(k) + ") = " +
                          std::to_string(combos) + " exceeds budget " + std::to_string(budget));
  }

  std::vector<std::size_t> current(k);
  std::iota(current.begin(), current.end(), std::size_t{0});
  std::vector<std::size_t> best = current;
  double best_det = principal_minor(L, current).partialPivLu().determinant();
  for (;;) {
    const double det = principal_minor(L, current).partialPivLu().determinant();
    // Lexicographic enumeration: a later tuple must win by more than rounding.
    if (det > best_det + kTieTolerance * std::abs(best_det)) {
      best_det = det;
      best = current;
    }
    // Advance to the next combination in lexicographic order.
    std::size_t pos = k;
    while (pos > 0 && current[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++current[pos - 1];
    for (std::size_t q = pos; q < k; ++q) current[q] = current[q - 1] + 1;
  }
  return best;
}

std::vector<std::size_t> nn_select(std::span<const embed::EmbeddingVector> items, const embed::EmbeddingVector& query,
                                   std::size_t k) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!query.item_id.empty() && items[i].item_id == query.item_id) continue;
    if (items[i].dim() != query.dim()) {
      throw InvalidArgument("nn_select: dimension mismatch at '" + items[i].item_id + "'");
    }
    scored.emplace_back(embed::cosine(items[i].values, query.values), i);
  }
  if (k > scored.size()) {
    throw PreconditionError("nn_select: k = " + std::to_string(k) + " exceeds the " + std::to_string(scored.size()) +
                            " available non-query items");
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<std::size_t> random_select(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw InvalidArgument("random_select: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  perm.resize(k);
  return perm;
}

}  // namespace tadacap::dpp
