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
#include "tadacap/synthgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>

#include "tadacap/errors.hpp"
#include "tadacap/parallel.hpp"
#include "tadacap/render.hpp"
#include "tadacap/rng.hpp"

namespace tadacap::synth {
namespace {

double uniform(Rng& rng, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace

std::string_view to_string(NoiseMode m) { return m == NoiseMode::absolute ? "absolute" : "relative"; }
std::string_view to_string(TrendMode m) { return m == TrendMode::additive ? "additive" : "anchor-drift"; }

NoiseMode parse_noise_mode(std::string_view s) {
  if (s == "absolute") return NoiseMode::absolute;
  if (s == "relative") return NoiseMode::relative;
  throw InvalidArgument("unknown noise mode '" + std::string(s) + "' (absolute|relative)");
}

TrendMode parse_trend_mode(std::string_view s) {
  if (s == "additive") return TrendMode::additive;
  if (s == "anchor-drift") return TrendMode::anchor_drift;
  throw InvalidArgument("unknown trend mode '" + std::string(s) + "' (additive|anchor-drift)");
}

void validate(const StockParams& p, bool shock_regime) {
  require(std::isfinite(p.mean) && std::isfinite(p.trend), "stock params: mean and trend must be finite");
  require(p.kappa >= 0.0 && p.kappa <= 1.0, "stock params: kappa must lie in [0, 1]");
  require(p.sigma >= 0.0 && std::isfinite(p.sigma), "stock params: sigma must be >= 0");
  require(p.shock_sigma >= 0.0 && std::isfinite(p.shock_sigma), "stock params: shock sigma must be >= 0");
  require(p.shock_prob >= 0.0 && p.shock_prob <= 1.0, "stock params: shock probability must lie in [0, 1]");
  require(p.length >= 2, "stock params: length must be >= 2");
  if (shock_regime) require(p.shock_sigma >= p.sigma, "stock params: shock regime needs shock sigma >= sigma");
}

nlohmann::json to_json(const StockParams& p) {
  return {{"mean", p.mean},
          {"kappa", p.kappa},
          {"sigma", p.sigma},
          {"T", p.trend},
          {"p", p.shock_prob},
          {"shock_sigma", p.shock_sigma},
          {"length", p.length},
          {"seed", p.seed},
          {"noise_mode", to_string(p.noise_mode)},
          {"trend_mode", to_string(p.trend_mode)}};
}

StockParams stock_params_from_json(const nlohmann::json& j) {
  StockParams p;
  p.mean = j.at("mean").get<double>();
  p.kappa = j.at("kappa").get<double>();
  p.sigma = j.at("sigma").get<double>();
  p.trend = j.at("T").get<double>();
  p.shock_prob = j.at("p").get<double>();
  p.shock_sigma = j.at("shock_sigma").get<double>();
  p.length = j.at("length").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.noise_mode = parse_noise_mode(j.at("noise_mode").get<std::string>());
  p.trend_mode = parse_trend_mode(j.at("trend_mode").get<std::string>());
  return p;
}

std::vector<double> gen_stock_series(const StockParams& p) {
  validate(p);
  Rng rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution shock(p.shock_prob);

  std::vector<double> r(p.length);
  r[0] = p.mean;
  for (std::size_t t = 1; t < p.length; ++t) {
    const double prev = r[t - 1];
    const double scale = p.noise_mode == NoiseMode::relative ? std::max(prev, 1.0) : 1.0;
    // Draw order is fixed (noise, shock flag, shock size) so that zeroed
    // parameters do not change the stream seen by the others.
    const double u = p.sigma * scale * normal(rng);
    const bool has_shock = shock(rng);
    const double shock_draw = normal(rng);
    const double m = has_shock ? p.shock_sigma * scale * shock_draw : 0.0;

    double anchor = p.mean;
    double drift = p.trend;
    if (p.trend_mode == TrendMode::anchor_drift) {
      anchor += p.trend * static_cast<double>(t);
      drift = 0.0;
    }
    // kappa*anchor + (1-kappa)*prev, written so that prev == anchor is an exact fixed point.
    r[t] = std::max(0.0, prev + p.kappa * (anchor - prev) + u + m + drift);
  }
  return r;
}

bool params_within(const StockParams& p, const RegimeSpec& regime) {
  const auto& g = regime.ranges;
  return g.mean.contains(p.mean) && g.sigma.contains(p.sigma) && g.shock_prob.contains(p.shock_prob) &&
         g.trend.contains(p.trend) && g.kappa.contains(p.kappa) && g.shock_sigma.contains(p.shock_sigma);
}

std::string sentence(std::string_view phrase) {
  std::string s(phrase);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.empty()) return s;
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  if (s.back() != '.') s.push_back('.');
  return s;
}

StockDraw sample_stock_regime(std::span<const RegimeSpec> catalog, std::uint64_t seed,
                              const StockDrawOptions& options) {
  if (catalog.empty()) throw InvalidArgument("sample_stock_regime: empty catalog");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> which(0, catalog.size() - 1);
  const RegimeSpec& regime = catalog[which(rng)];

  StockDraw draw;
  auto& p = draw.params;
  p.mean = uniform(rng, regime.ranges.mean);
  p.sigma = uniform(rng, regime.ranges.sigma);
  p.shock_prob = uniform(rng, regime.ranges.shock_prob);
  p.trend = uniform(rng, regime.ranges.trend);
  p.kappa = uniform(rng, regime.ranges.kappa);
  p.shock_sigma = uniform(rng, regime.ranges.shock_sigma);
  p.length = options.length;
  p.noise_mode = options.noise_mode;
  p.trend_mode = options.trend_mode;
  p.seed = derive_seed(seed, 1);
  validate(p, regime.shock_regime);

  draw.caption.agnostic = sentence(pick(rng, regime.agnostic));
  draw.caption.in_domain = sentence(pick(rng, regime.domain));
  draw.caption.regimes = {regime.name};
  return draw;
}

void validate(const PhysicsParams& p) {
  require(p.segments.size() == 1 || p.segments.size() == 2, "physics params: need one or two segments");
  std::size_t total = 0;
  for (const auto& s : p.segments) {
    require(s.length >= 1, "physics params: empty segment");
    require(std::isfinite(s.a) && std::isfinite(s.b), "physics params: non-finite coefficient");
    if (s.kind == SegmentKind::exponential) {
      require(s.a > 0.0, "physics params: exponential segment needs q0 > 0");
      require(std::abs(s.b * static_cast<double>(s.length)) <= kMaxExponent,
              "physics params: |q1 * length| exceeds the overflow guard of 30");
    }
    total += s.length;
  }
  require(total >= 8, "physics params: total length must be >= 8");
}

nlohmann::json to_json(const PhysicsParams& p) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : p.segments) {
    segs.push_back({{"kind", s.kind == SegmentKind::linear ? "linear" : "exponential"},
                    {"a", s.a},
                    {"b", s.b},
                    {"length", s.length}});
  }
  return {{"segments", segs}, {"seed", p.seed}};
}

PhysicsParams physics_params_from_json(const nlohmann::json& j) {
  PhysicsParams p;
  p.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("segments")) {
    Segment seg;
    const auto kind = s.at("kind").get<std::string>();
    if (kind != "linear" && kind != "exponential") throw FormatError("unknown segment kind '" + kind + "'");
    seg.kind = kind == "linear" ? SegmentKind::linear : SegmentKind::exponential;
    seg.a = s.at("a").get<double>();
    seg.b = s.at("b").get<double>();
    seg.length = s.at("length").get<std::size_t>();
    p.segments.push_back(seg);
  }
  return p;
}

std::vector<double> gen_physics_series(const PhysicsParams& p) {
  validate(p);
  std::vector<double> x;
  const Segment& first = p.segments.front();
  for (std::size_t t = 0; t < first.length; ++t) {
    const double tt = static_cast<double>(t);
    x.push_back(first.kind == SegmentKind::linear ? first.a + first.b * tt : first.a * std::exp(first.b * tt));
  }
  if (p.segments.size() == 2) {
    const Segment& second = p.segments[1];
    const double junction = x.back();
    if (second.kind == SegmentKind::exponential && !(junction > 0.0)) {
      throw InvalidArgument("physics params: exponential segment cannot continue from a non-positive value");
    }
    // Local time 0 is the junction itself; the new samples start at 1.
    for (std::size_t t = 1; t <= second.length; ++t) {
      const double tt = static_cast<double>(t);
      x.push_back(second.kind == SegmentKind::linear ? junction + second.b * tt : junction * std::exp(second.b * tt));
    }
  }
  return x;
}

std::string sign_class(const Segment& s) {
  if (s.kind == SegmentKind::exponential) {
    if (s.b > 0.0) return "exp-positive";
    if (s.b < 0.0) return "exp-negative";
    throw InvalidArgument("physics caption: exponential segment with q1 = 0 has no sign-class");
  }
  if (s.b > 0.0) return "linear-increasing";
  if (s.b < 0.0) return "linear-decreasing";
  return "linear-constant";
}

CaptionPair physics_caption(const PhysicsParams& p, std::uint64_t seed) {
  validate(p);
  const PhysicsCatalog& cat = physics_catalog();
  Rng rng(seed);
  CaptionPair out;
  if (p.segments.size() == 1) {
    const auto& cls = cat.find(sign_class(p.segments[0]));
    out.in_domain = sentence(pick(rng, cls.velocity));
    out.agnostic = sentence(pick(rng, cls.agnostic));
    out.regimes = {cls.name};
    return out;
  }
  const auto& c1 = cat.find(sign_class(p.segments[0]));
  const auto& c2 = cat.find(sign_class(p.segments[1]));
  const std::string v1 = pick(rng, c1.velocity);
  const std::string v2 = pick(rng, c2.velocity);
  const std::string& when1 = pick(rng, cat.first_connectives);
  const std::string& when2 = pick(rng, cat.second_connectives);
  out.in_domain = sentence(v1 + " " + when1) + " " + sentence(v2 + " " + when2);
  out.agnostic = sentence(pick(rng, c1.agnostic) + ", then " + pick(rng, c2.agnostic));
  out.regimes = {c1.name, c2.name};
  return out;
}

PhysicsParams sample_physics_params(std::uint64_t seed, std::size_t length) {
  if (length < 8) throw InvalidArgument("physics series length must be >= 8");
  const PhysicsCatalog& cat = physics_catalog();
  Rng rng(seed);
  PhysicsParams p;
  p.seed = seed;
  const std::size_t segments = std::uniform_int_distribution<int>(1, 2)(rng) == 1 ? 1 : 2;
  const std::size_t first_len = segments == 1 ? length : length / 2;
  for (std::size_t s = 0; s < segments; ++s) {
    const PhysicsClass& cls = pick(rng, cat.classes);
    Segment seg;
    seg.length = s == 0 ? first_len : length - first_len;
    if (cls.kind == "exponential") {
      seg.kind = SegmentKind::exponential;
      seg.a = uniform(rng, {1.0, 10.0});
      seg.b = cls.sign * uniform(rng, {0.01, 0.04});
    } else {
      seg.kind = SegmentKind::linear;
      // Decreasing lines start high enough to stay positive over the segment.
      seg.a = cls.sign < 0 ? uniform(rng, {20.0, 40.0}) : uniform(rng, {1.0, 15.0});
      seg.b = cls.sign * uniform(rng, {0.05, 0.3});
    }
    p.segments.push_back(seg);
  }
  validate(p);
  return p;
}

std::string_view to_string(DatasetKind k) { return k == DatasetKind::stock ? "stock" : "physics"; }

DatasetKind parse_dataset_kind(std::string_view s) {
  if (s == "stock") return DatasetKind::stock;
  if (s == "physics") return DatasetKind::physics;
  throw InvalidArgument("unknown dataset kind '" + std::string(s) + "' (stock|physics)");
}

std::vector<TimeSeriesSample> gen_dataset(DatasetKind kind, std::size_t n, std::uint64_t seed,
                                          const DatasetOptions& options) {
  if (n == 0) throw InvalidArgument("gen_dataset: n must be at least 1");
  std::vector<TimeSeriesSample> out(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    TimeSeriesSample& s = out[i];
    const std::uint64_t sample_seed = derive_seed(seed, i);
    char id[32];
    std::snprintf(id, sizeof id, "%s-%04zu", std::string(to_string(kind)).c_str(), i);
    s.id = id;
    s.kind = std::string(to_string(kind));
    s.seed = sample_seed;
    CaptionPair caption;
    if (kind == DatasetKind::stock) {
      const StockDraw draw = sample_stock_regime(stock_catalog(), sample_seed,
                                                 {options.length, options.noise_mode, options.trend_mode});
      s.series = gen_stock_series(draw.params);
      s.params = to_json(draw.params);
      caption = draw.caption;
    } else {
      const PhysicsParams params = sample_physics_params(sample_seed, options.length);
      s.series = gen_physics_series(params);
      s.params = to_json(params);
      caption = physics_caption(params, derive_seed(sample_seed, 2));
    }
    s.agnostic = caption.agnostic;
    s.in_domain = {caption.in_domain};
    for (std::size_t r = 0; r < caption.regimes.size(); ++r) {
      s.regime += (r ? "+" : "") + caption.regimes[r];
    }
    s.image_path = "images/" + s.id + ".png";
    if (options.render) s.image_png = render::render_series(s.series);
  });
  return out;
}

nlohmann::json to_json(const TimeSeriesSample& s) {
  return {{"id", s.id},         {"kind", s.kind},         {"series", s.series},
          {"image_path", s.image_path}, {"agnostic", s.agnostic}, {"in_domain", s.in_domain},
          {"regime", s.regime}, {"params", s.params},     {"seed", s.seed}};
}

TimeSeriesSample sample_from_json(const nlohmann::json& j) {
  TimeSeriesSample s;
  s.id = j.at("id").get<std::string>();
  s.kind = j.value("kind", "");
  s.series = j.at("series").get<std::vector<double>>();
  s.image_path = j.value("image_path", "");
  s.agnostic = j.value("agnostic", "");
  s.in_domain = j.value("in_domain", std::vector<std::string>{});
  s.regime = j.value("regime", "");
  s.params = j.value("params", nlohmann::json::object());
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

void write_dataset(std::span<const TimeSeriesSample> samples, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  std::ofstream out(dir / "dataset.jsonl", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "dataset.jsonl").string());
  for (const auto& s : samples) {
    if (!s.image_png.empty()) {
      std::ofstream img(dir / s.image_path, std::ios::binary | std::ios::trunc);
      if (!img) throw Error("cannot write " + (dir / s.image_path).string());
      img.write(reinterpret_cast<const char*>(s.image_png.data()), static_cast<std::streamsize>(s.image_png.size()));
    }
    out << to_json(s).dump() << '\n';
  }
}

std::vector<TimeSeriesSample> read_dataset(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw Error("cannot read " + jsonl.string());
  std::vector<TimeSeriesSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tadacap::synth
