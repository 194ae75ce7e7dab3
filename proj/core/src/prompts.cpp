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
#include "tadacap/prompts.hpp"

#include <cctype>

#include "tadacap/errors.hpp"

namespace tadacap::prompts {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

void require(std::string_view value, const char* what) {
  if (trim(value).empty()) throw InvalidArgument(std::string(what) + " must not be empty");
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

// ASCII quotes and the UTF-8 curly ones.
std::string_view strip_quotes(std::string_view s) {
  static constexpr std::string_view kQuotes[] = {"\"", "'", "`", "“", "”", "‘", "’"};
  for (bool changed = true; changed;) {
    changed = false;
    s = trim(s);
    for (auto q : kQuotes) {
      if (s.size() >= q.size() && s.substr(0, q.size()) == q) {
        s.remove_prefix(q.size());
        changed = true;
      }
      if (s.size() >= q.size() && s.substr(s.size() - q.size()) == q) {
        s.remove_suffix(q.size());
        changed = true;
      }
    }
  }
  return s;
}

}  // namespace

std::string sanitize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

PromptBundle build_icl_prompt(const std::vector<ExamplePair>& pairs, std::string_view query,
                              std::string_view domain) {
  if (pairs.empty()) throw InvalidArgument("ICL prompt needs at least one example pair");
  require(query, "query caption");
  require(domain, "domain");
  PromptBundle b;
  b.mode = "icl";
  b.domain = sanitize(domain);
  b.query = sanitize(query);
  b.text = "You translate generic time-series descriptions into descriptions for the domain: " + b.domain + ".\n";
  for (const auto& p : pairs) {
    require(p.agnostic, "example agnostic caption");
    require(p.in_domain, "example in-domain caption");
    ExamplePair clean{sanitize(p.agnostic), sanitize(p.in_domain)};
    b.text += "Generic: " + clean.agnostic + "\nIn-domain: " + clean.in_domain + "\n";
    b.pairs.push_back(std::move(clean));
  }
  b.text += "Generic: " + b.query + "\nIn-domain:";
  return b;
}

PromptBundle build_zs_prompt(std::string_view query, std::string_view domain) {
  require(query, "query caption");
  require(domain, "domain");
  PromptBundle b;
  b.mode = "zs";
  b.domain = sanitize(domain);
  b.query = sanitize(query);
  b.text = "Translate the time-series description '" + b.query + "' in the context of " + b.domain + ".";
  return b;
}

PromptBundle build_multimodal_prompt(std::string_view domain) {
  require(domain, "domain");
  PromptBundle b;
  b.mode = "multimodal";
  b.domain = sanitize(domain);
  b.text = "Describe the time-series in the context of " + b.domain + ".";
  return b;
}

std::string postprocess(std::string_view raw) {
  std::string text;
  text.reserve(raw.size());
  for (char c : raw) {
    if (c != '\r') text += c;
  }
  std::string_view s = trim(text);
  if (const auto para = s.find("\n\n"); para != std::string_view::npos) s = s.substr(0, para);
  // Blank lines with stray spaces also end the paragraph.
  for (std::size_t pos = s.find('\n'); pos != std::string_view::npos; pos = s.find('\n', pos + 1)) {
    const auto next = s.find('\n', pos + 1);
    if (next != std::string_view::npos && trim(s.substr(pos + 1, next - pos - 1)).empty()) {
      s = s.substr(0, pos);
      break;
    }
  }
  s = trim(s);
  constexpr std::string_view cue = "In-domain:";
  if (starts_with_icase(s, cue)) s.remove_prefix(cue.size());
  return sanitize(strip_quotes(s));
}

}  // namespace tadacap::prompts
