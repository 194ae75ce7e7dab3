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
#include <span>
#include <vector>

// Small descriptive statistics shared by the featurizer and the
// rule-based shape captioner.
namespace tadacap::stats {

double mean(std::span<const double> x);

// Population standard deviation.
double stddev(std::span<const double> x);

double median(std::vector<double> x);

// (x - min) / (max - min); a zero-range series maps to all zeros.
std::vector<double> minmax_normalize(std::span<const double> x);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_ss = 0.0;
};

// Least-squares line through (t_i, y_i).
LineFit fit_line(std::span<const double> t, std::span<const double> y);

// Least-squares line against sample positions 0, 1, ..., n-1.
LineFit fit_line(std::span<const double> y);

// Sample autocorrelation at the given lag; 0 for zero-variance input.
double autocorrelation(std::span<const double> x, std::size_t lag);

// Number of steps whose absolute increment exceeds factor times the median
// absolute increment in a centred window of +-half_window steps. The local
// median keeps smooth exponential growth from counting as jumps.
std::size_t jump_count(std::span<const double> x, double factor = 4.0,
                       std::size_t half_window = 7);

// Robust per-step noise scale: 1.4826 * MAD of second differences / sqrt(2).
// Zero for straight lines; insensitive to isolated shocks.
double step_noise(std::span<const double> x);

// step_noise divided by mean |x|; 0 when the series is identically zero.
double relative_step_noise(std::span<const double> x);

}  // namespace tadacap::stats
