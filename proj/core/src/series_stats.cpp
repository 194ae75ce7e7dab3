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
#include "tadacap/series_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tadacap::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  const auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
  std::nth_element(x.begin(), mid, x.end());
  if (x.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(x.begin(), mid);
  return 0.5 * (lower + upper);
}

std::vector<double> minmax_normalize(std::span<const double> x) {
  std::vector<double> z(x.size(), 0.0);
  if (x.empty()) return z;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return z;
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - *lo) / range;
  return z;
}

LineFit fit_line(std::span<const double> t, std::span<const double> y) {
  LineFit fit;
  const std::size_t n = std::min(t.size(), y.size());
  if (n == 0) return fit;
  const double tm = mean(t.first(n));
  const double ym = mean(y.first(n));
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  fit.slope = stt > 0.0 ? sty / stt : 0.0;
  fit.intercept = ym - fit.slope * tm;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * t[i]);
    fit.residual_ss += r * r;
  }
  return fit;
}

LineFit fit_line(std::span<const double> y) {
  std::vector<double> t(y.size());
  std::iota(t.begin(), t.end(), 0.0);
  return fit_line(t, y);
}

double autocorrelation(std::span<const double> x, std::size_t lag) {
  const std::size_t n = x.size();
  if (lag >= n) return 0.0;
  const double m = mean(x);
  double denom = 0.0;
  for (double v : x) denom += (v - m) * (v - m);
  if (!(denom > 0.0)) return 0.0;
  double num = 0.0;
  for (std::size_t i = lag; i < n; ++i) num += (x[i] - m) * (x[i - lag] - m);
  return num / denom;
}

std::size_t jump_count(std::span<const double> x, double factor, std::size_t half_window) {
  if (x.size() < 2) return 0;
  std::vector<double> inc(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) inc[i] = std::abs(x[i + 1] - x[i]);
  std::size_t jumps = 0;
  std::vector<double> window;
  for (std::size_t i = 0; i < inc.size(); ++i) {
    const std::size_t lo = i > half_window ? i - half_window : 0;
    const std::size_t hi = std::min(inc.size(), i + half_window + 1);
    window.assign(inc.begin() + static_cast<std::ptrdiff_t>(lo),
                  inc.begin() + static_cast<std::ptrdiff_t>(hi));
    if (inc[i] > factor * median(window)) ++jumps;
  }
  return jumps;
}

double step_noise(std::span<const double> x) {
  if (x.size() < 3) return 0.0;
  std::vector<double> d2(x.size() - 2);
  for (std::size_t i = 0; i + 2 < x.size(); ++i) d2[i] = x[i + 2] - 2.0 * x[i + 1] + x[i];
  const double med = median(d2);
  for (double& v : d2) v = std::abs(v - med);
  return 1.4826 * median(std::move(d2)) / std::sqrt(2.0);
}

double relative_step_noise(std::span<const double> x) {
  double level = 0.0;
  for (double v : x) level += std::abs(v);
  if (x.empty() || !(level > 0.0)) return 0.0;
  level /= static_cast<double>(x.size());
  return step_noise(x) / level;
}

}  // namespace tadacap::stats
