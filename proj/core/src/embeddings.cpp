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
#include "tadacap/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tadacap/errors.hpp"
#include "tadacap/series_stats.hpp"

namespace tadacap::embed {

void normalize(EmbeddingVector& v) {
  double ss = 0.0;
  for (double x : v.values) {
    if (!std::isfinite(x)) throw InvalidArgument("embedding '" + v.item_id + "' has non-finite entries");
    ss += x * x;
  }
  if (!(ss > 0.0)) throw InvalidArgument("embedding '" + v.item_id + "' is the zero vector");
  const double inv = 1.0 / std::sqrt(ss);
  for (double& x : v.values) x *= inv;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("cosine: dimension mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (!(aa > 0.0) || !(bb > 0.0)) return 0.0;
  return ab / std::sqrt(aa * bb);
}

std::array<double, feature::kDim> raw_features(std::span<const double> series,
                                               const FeatureConfig& config) {
  using namespace feature;
  if (series.size() < kMinLength) {
    throw InvalidArgument("featurize: series needs at least 8 points, got " +
                          std::to_string(series.size()));
  }
  for (double v : series) {
    if (!std::isfinite(v)) throw InvalidArgument("featurize: non-finite value in series");
  }

  std::array<double, kDim> f{};
  const std::size_t n = series.size();
  const std::vector<double> z = stats::minmax_normalize(series);
  std::vector<double> tau(n);
  for (std::size_t i = 0; i < n; ++i) tau[i] = static_cast<double>(i) / static_cast<double>(n - 1);

  f[kLevel + 0] = stats::mean(z);
  f[kLevel + 1] = stats::stddev(z);
  // min and max are always 0 and 1 here; where they occur is not.
  f[kLevel + 2] = tau[static_cast<std::size_t>(std::min_element(z.begin(), z.end()) - z.begin())];
  f[kLevel + 3] = tau[static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin())];

  f[kSlope] = stats::fit_line(tau, z).slope;
  // Segment means, not segment slopes: slopes over 16 noisy points are
  // mostly noise and made every volatile series look unlike every other.
  const double z_mean = stats::mean(z);
  for (std::size_t s = 0; s < kSegments; ++s) {
    const std::size_t lo = s * n / kSegments;
    const std::size_t hi = (s + 1) * n / kSegments;
    f[kSegmentMeans + s] = 2.0 * (stats::mean(std::span(z).subspan(lo, hi - lo)) - z_mean);
  }

  for (std::size_t lag = 1; lag <= kLags; ++lag) f[kAutocorr + lag - 1] = stats::autocorrelation(z, lag);

  // Plain DFT; series are short and this keeps the output bit-stable.
  const double zm = stats::mean(z);
  const std::size_t n_freq = n / 2;
  std::vector<double> power(n_freq, 0.0);
  std::vector<double> cos_tab(n), sin_tab(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    cos_tab[j] = std::cos(angle);
    sin_tab[j] = std::sin(angle);
  }
  for (std::size_t k = 1; k <= n_freq; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t j = k * t % n;
      re += (z[t] - zm) * cos_tab[j];
      im -= (z[t] - zm) * sin_tab[j];
    }
    power[k - 1] = (re * re + im * im) / static_cast<double>(n);
  }
  for (std::size_t b = 0; b < kBins; ++b) {
    const std::size_t lo = b * n_freq / kBins;
    const std::size_t hi = (b + 1) * n_freq / kBins;
    double energy = 0.0;
    for (std::size_t k = lo; k < hi; ++k) energy += power[k];
    f[kSpectrum + b] = std::log1p(energy);
  }

  f[kJumps] = static_cast<double>(stats::jump_count(series, config.jump_factor)) / static_cast<double>(n);

  int balance = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (series[i] > series[i - 1]) ++balance;
    if (series[i] < series[i - 1]) --balance;
  }
  f[kSignBalance] = static_cast<double>(balance) / static_cast<double>(n - 1);
  f[kSmoothness] = 1.0 / (1.0 + 20.0 * stats::relative_step_noise(series));
  return f;
}

EmbeddingVector builtin_featurize(std::span<const double> series, const FeatureConfig& config,
                                  std::string item_id) {
  const auto f = raw_features(series, config);
  EmbeddingVector v{std::move(item_id), std::vector<double>(f.begin(), f.end()), config.provider_tag};
  normalize(v);
  return v;
}

SimilarityKernel build_kernel(std::span<const EmbeddingVector> embeddings) {
  if (embeddings.empty()) throw InvalidArgument("build_kernel: no embeddings");
  const std::size_t d = embeddings.front().dim();
  for (const auto& e : embeddings) {
    if (e.dim() != d) {
      throw InvalidArgument("build_kernel: dimension mismatch (" + std::to_string(e.dim()) + " vs " +
                            std::to_string(d) + ") at '" + e.item_id + "'");
    }
    double ss = 0.0;
    for (double x : e.values) ss += x * x;
    if (!std::isfinite(ss) || std::abs(std::sqrt(ss) - 1.0) > 1e-6) {
      throw InvalidArgument("build_kernel: embedding '" + e.item_id + "' is not unit norm");
    }
  }

  const auto n = static_cast<Eigen::Index>(embeddings.size());
  SimilarityKernel kernel;
  kernel.item_ids.reserve(embeddings.size());
  for (const auto& e : embeddings) kernel.item_ids.push_back(e.item_id);
  kernel.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& xi = embeddings[static_cast<std::size_t>(i)].values;
    kernel.entries(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& xj = embeddings[static_cast<std::size_t>(j)].values;
      const double dot = std::inner_product(xi.begin(), xi.end(), xj.begin(), 0.0);
      kernel.entries(i, j) = dot;
      kernel.entries(j, i) = dot;
    }
  }
  return kernel;
}

}  // namespace tadacap::embed
