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
#include "tadacap/report.hpp"

#include <fmt/format.h>

#include <fstream>

#include "tadacap/errors.hpp"

namespace tadacap::report {

std::size_t ModeResult::scored() const noexcept {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.ok ? 1 : 0;
  return n;
}

double ModeResult::coverage() const noexcept {
  return samples.empty() ? 0.0 : static_cast<double>(scored()) / static_cast<double>(samples.size());
}

void aggregate(ModeResult& r) {
  eval::CaptionScores sum;
  std::size_t n = 0;
  for (const auto& s : r.samples) {
    if (!s.ok) continue;
    sum.rouge_l += s.scores.rouge_l;
    sum.cider_d += s.scores.cider_d;
    sum.spice += s.scores.spice;
    sum.spider += s.scores.spider;
    ++n;
  }
  if (n > 0) {
    const double d = static_cast<double>(n);
    sum = {sum.rouge_l / d, sum.cider_d / d, sum.spice / d, sum.spider / d};
  }
  r.corpus = sum;
}

DisplayRow display(const eval::CaptionScores& s) {
  return {100.0 * s.rouge_l, 10.0 * s.cider_d, 100.0 * s.spice, 100.0 * s.spider};
}

std::string to_markdown(std::span<const ModeResult> results) {
  std::string out =
      "| Method | Provider | ROUGE-L | CIDEr-D | SPICE-proxy | SPIDEr | Queries | Coverage |\n"
      "|---|---|---:|---:|---:|---:|---:|---:|\n";
  std::vector<std::string> partial;
  for (const auto& r : results) {
    const auto d = display(r.corpus);
    out += fmt::format("| {} | {} | {:.1f} | {:.1f} | {:.1f} | {:.1f} | {} | {:.1f}% |\n", r.method, r.provider,
                       d.rouge_l, d.cider_d, d.spice, d.spider, r.queries(), 100.0 * r.coverage());
    if (r.coverage() < 1.0) partial.push_back(r.method);
  }
  out += "\nScores x100 (CIDEr-D x10, so 100.0 is a perfect match in every column). "
         "SPICE-proxy is a content-word F1, not parser-based SPICE.\n";
  for (const auto& m : partial) {
    out += fmt::format("\n{}: incomplete coverage, failed queries are listed in per_sample.jsonl.\n", m);
  }
  return out;
}

std::string to_csv(std::span<const ModeResult> results) {
  std::string out = "method,provider,rouge_l,cider_d,spice_proxy,spider,queries,scored,coverage\n";
  for (const auto& r : results) {
    const auto d = display(r.corpus);
    out += fmt::format("{},{},{:.2f},{:.2f},{:.2f},{:.2f},{},{},{:.4f}\n", r.method, r.provider, d.rouge_l,
                       d.cider_d, d.spice, d.spider, r.queries(), r.scored(), r.coverage());
  }
  return out;
}

std::string to_per_sample_jsonl(std::span<const ModeResult> results) {
  std::string out;
  for (const auto& r : results) {
    for (const auto& s : r.samples) {
      nlohmann::json j = {{"method", r.method}, {"id", s.id}, {"ok", s.ok}};
      if (s.ok) {
        j["caption"] = s.caption;
        j["rouge_l"] = s.scores.rouge_l;
        j["cider_d"] = s.scores.cider_d;
        j["spice_proxy"] = s.scores.spice;
        j["spider"] = s.scores.spider;
      } else {
        j["error"] = s.error;
      }
      for (const auto& [k, v] : s.detail.items()) {
        if (!j.contains(k)) j[k] = v;
      }
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

void write_report(std::span<const ModeResult> results, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "results.md", to_markdown(results));
  write_text(dir / "results.csv", to_csv(results));
  write_text(dir / "per_sample.jsonl", to_per_sample_jsonl(results));
}

}  // namespace tadacap::report
