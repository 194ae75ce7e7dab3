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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Prompt templates and LLM output clean-up.
namespace tadacap::prompts {

// Recorded in traces; bump when any template text changes.
inline constexpr std::string_view kTemplateVersion = "icl-v1";

struct ExamplePair {
  std::string agnostic;
  std::string in_domain;

  bool operator==(const ExamplePair&) const = default;
};

struct PromptBundle {
  std::string mode;  // "icl" | "zs" | "multimodal"
  std::string domain;
  std::vector<ExamplePair> pairs;
  std::string query;
  std::string text;
};

// Trim, and collapse every whitespace run (newlines included) to one space.
std::string sanitize(std::string_view s);

// "You translate generic time-series descriptions into descriptions for the
// domain: {domain}." then "Generic: .. / In-domain: .." per pair, then the
// query block ending in the bare "In-domain:" cue. Pair order is kept.
PromptBundle build_icl_prompt(const std::vector<ExamplePair>& pairs, std::string_view query,
                              std::string_view domain);

// "Translate the time-series description '{query}' in the context of {domain}."
PromptBundle build_zs_prompt(std::string_view query, std::string_view domain);

// "Describe the time-series in the context of {domain}."
PromptBundle build_multimodal_prompt(std::string_view domain);

// Trim whitespace, keep the first paragraph, drop a leading "In-domain:"
// echo and surrounding quotes.
std::string postprocess(std::string_view raw);

}  // namespace tadacap::prompts
