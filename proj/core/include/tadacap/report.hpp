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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tadacap/eval_metrics.hpp"

// Result tables: one row per (method, provider), scores x100.
namespace tadacap::report {

struct SampleResult {
  std::string id;
  std::string caption;
  eval::CaptionScores scores;
  bool ok = false;
  std::string error;
  // Extra per-sample data copied into per_sample.jsonl (trace, prompt, ...).
  nlohmann::json detail = nlohmann::json::object();
};

struct ModeResult {
  std::string method;    // "TADACap-diverse", ...
  std::string provider;  // LLM or multimodal provider tag
  std::vector<SampleResult> samples;
  // Means over scored samples.
  eval::CaptionScores corpus;

  std::size_t queries() const noexcept { return samples.size(); }
  std::size_t scored() const noexcept;
  double coverage() const noexcept;
};

// Fills corpus from the successful samples.
void aggregate(ModeResult& r);

// Display scale: ROUGE-L, SPICE-proxy and SPIDEr x100; CIDEr-D (0..10) x10,
// so a perfect caption shows 100.0 in every column.
struct DisplayRow {
  double rouge_l;
  double cider_d;
  double spice;
  double spider;
};
DisplayRow display(const eval::CaptionScores& s);

std::string to_markdown(std::span<const ModeResult> results);
std::string to_csv(std::span<const ModeResult> results);
// One JSON line per (method, sample).
std::string to_per_sample_jsonl(std::span<const ModeResult> results);

// results.md, results.csv and per_sample.jsonl under dir.
void write_report(std::span<const ModeResult> results, const std::filesystem::path& dir);

}  // namespace tadacap::report
