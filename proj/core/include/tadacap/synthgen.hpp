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

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tadacap/catalog.hpp"

// Synthetic benchmark data: mean-reverting stock prices with trend and
// megashocks, piecewise linear/exponential velocity curves, and the
// templated caption pairs that go with them.
namespace tadacap::synth {

enum class NoiseMode {
  absolute,  // u_t ~ N(0, sigma^2)
  relative,  // u_t ~ N(0, (sigma * max(r_{t-1}, 1))^2)
};

enum class TrendMode {
  additive,      // T added to r_t every step (inside the max{0, .} clamp)
  anchor_drift,  // reversion anchor moves as mean + T * t
};

std::string_view to_string(NoiseMode m);
std::string_view to_string(TrendMode m);
NoiseMode parse_noise_mode(std::string_view s);
TrendMode parse_trend_mode(std::string_view s);

inline constexpr std::size_t kDefaultLength = 128;

struct StockParams {
  double mean = 100.0;
  double kappa = 0.0;
  double sigma = 0.0;
  double trend = 0.0;
  double shock_prob = 0.0;
  double shock_sigma = 0.0;
  std::size_t length = kDefaultLength;
  std::uint64_t seed = 0;
  NoiseMode noise_mode = NoiseMode::relative;
  TrendMode trend_mode = TrendMode::additive;
};

// Throws InvalidArgument on violated invariants. shock_regime additionally
// requires shock_sigma >= sigma.
void validate(const StockParams& p, bool shock_regime = false);

nlohmann::json to_json(const StockParams& p);
StockParams stock_params_from_json(const nlohmann::json& j);

// r_0 = mean; r_t = max{0, kappa*anchor_t + (1-kappa)*r_{t-1} + u_t + m_t (+ T)}.
// m_t is a megashock drawn with probability shock_prob.
std::vector<double> gen_stock_series(const StockParams& p);

// True when every parameter lies inside the regime's ranges.
bool params_within(const StockParams& p, const RegimeSpec& regime);

struct CaptionPair {
  std::string agnostic;
  std::string in_domain;
  std::vector<std::string> regimes;
};

// Capitalized, period-terminated sentence.
std::string sentence(std::string_view phrase);

struct StockDraw {
  StockParams params;
  CaptionPair caption;
};

struct StockDrawOptions {
  std::size_t length = kDefaultLength;
  NoiseMode noise_mode = NoiseMode::relative;
  TrendMode trend_mode = TrendMode::additive;
};

// Uniform regime, uniform parameters inside its ranges, one phrase from each bank.
StockDraw sample_stock_regime(std::span<const RegimeSpec> catalog, std::uint64_t seed,
                              const StockDrawOptions& options = {});

enum class SegmentKind { linear, exponential };

// linear: x = a + b t (p0, p1); exponential: x = a exp(b t) (q0, q1).
struct Segment {
  SegmentKind kind = SegmentKind::linear;
  double a = 0.0;
  double b = 0.0;
  std::size_t length = 0;
};

struct PhysicsParams {
  std::vector<Segment> segments;
  std::uint64_t seed = 0;
};

inline constexpr double kMaxExponent = 30.0;

void validate(const PhysicsParams& p);
nlohmann::json to_json(const PhysicsParams& p);
PhysicsParams physics_params_from_json(const nlohmann::json& j);

// Segment functions on integer t. A second segment continues from the first
// segment's final value: linear segments are shifted, exponential segments
// take that value as q0.
std::vector<double> gen_physics_series(const PhysicsParams& p);

// Catalog class name for a segment ("exp-positive", "linear-constant", ...).
std::string sign_class(const Segment& s);

CaptionPair physics_caption(const PhysicsParams& p, std::uint64_t seed);

PhysicsParams sample_physics_params(std::uint64_t seed, std::size_t length = kDefaultLength);

enum class DatasetKind { stock, physics };
std::string_view to_string(DatasetKind k);
DatasetKind parse_dataset_kind(std::string_view s);

struct TimeSeriesSample {
  std::string id;
  std::string kind;
  std::vector<double> series;
  std::string image_path;
  std::vector<std::uint8_t> image_png;  // not serialized; written under images/
  std::string agnostic;
  std::vector<std::string> in_domain;
  std::string regime;
  nlohmann::json params;
  std::uint64_t seed = 0;
};

struct DatasetOptions {
  std::size_t length = kDefaultLength;
  NoiseMode noise_mode = NoiseMode::relative;
  TrendMode trend_mode = TrendMode::additive;
  bool render = true;
  std::size_t threads = 1;
};

inline constexpr std::size_t kDefaultDatasetSize = 200;

std::vector<TimeSeriesSample> gen_dataset(DatasetKind kind, std::size_t n, std::uint64_t seed,
                                          const DatasetOptions& options = {});

nlohmann::json to_json(const TimeSeriesSample& s);
TimeSeriesSample sample_from_json(const nlohmann::json& j);

// <dir>/dataset.jsonl plus <dir>/images/<id>.png.
void write_dataset(std::span<const TimeSeriesSample> samples, const std::filesystem::path& dir);
std::vector<TimeSeriesSample> read_dataset(const std::filesystem::path& jsonl);

}  // namespace tadacap::synth
