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
#include "tadacap/eval_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "tadacap/errors.hpp"

namespace tadacap::eval {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) && c < 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TokenizedCaption::TokenizedCaption(std::string text) : original(std::move(text)), tokens(tokenize(original)) {}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::string_view candidate, std::span<const std::string> refs, double beta) {
  const auto cand = tokenize(candidate);
  if (cand.empty()) return 0.0;
  double best = 0.0;
  for (const auto& ref_text : refs) {
    const auto ref = tokenize(ref_text);
    if (ref.empty()) continue;
    const double lcs = static_cast<double>(lcs_length(cand, ref));
    const double r = lcs / static_cast<double>(ref.size());
    const double p = lcs / static_cast<double>(cand.size());
    const double denom = r + beta * beta * p;
    if (denom > 0.0) best = std::max(best, (1.0 + beta * beta) * r * p / denom);
  }
  return best;
}

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts out;
  if (n == 0 || tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (std::size_t j = 1; j < n; ++j) g += ' ' + tokens[i + j];
    ++out[g];
  }
  return out;
}

double CorpusIdf::idf(std::size_t n, const Ngram& gram) const {
  if (n == 0 || n > kMaxNgram || images == 0) return 0.0;
  const auto& table = df[n - 1];
  const auto it = table.find(gram);
  const double d = it == table.end() ? 1.0 : static_cast<double>(std::max<std::size_t>(it->second, 1));
  return std::log(static_cast<double>(images) / d);
}

CorpusIdf compute_idf(std::span<const std::vector<std::string>> refs_by_image) {
  if (refs_by_image.empty()) throw InvalidArgument("cannot build idf from an empty reference corpus");
  CorpusIdf out;
  out.images = refs_by_image.size();
  for (std::size_t img = 0; img < refs_by_image.size(); ++img) {
    if (refs_by_image[img].empty()) {
      throw InvalidArgument("image " + std::to_string(img) + " has no reference captions");
    }
    for (std::size_t n = 1; n <= kMaxNgram; ++n) {
      std::set<Ngram> seen;
      for (const auto& ref : refs_by_image[img]) {
        for (auto& [g, c] : count_ngrams(tokenize(ref), n)) seen.insert(g);
      }
      for (const auto& g : seen) ++out.df[n - 1][g];
    }
  }
  return out;
}

namespace {

struct TfIdf {
  std::map<Ngram, double> vec;
  double norm = 0.0;
};

TfIdf tfidf(const NgramCounts& counts, std::size_t n, const CorpusIdf& idf) {
  TfIdf out;
  for (const auto& [g, c] : counts) {
    const double w = static_cast<double>(c) * idf.idf(n, g);
    out.vec.emplace(g, w);
    out.norm += w * w;
  }
  out.norm = std::sqrt(out.norm);
  return out;
}

}  // namespace

double cider_d(std::string_view candidate, std::span<const std::string> refs, const CorpusIdf& idf,
               std::size_t n_max, double sigma) {
  const auto cand = tokenize(candidate);
  if (cand.empty() || refs.empty() || n_max == 0) return 0.0;
  n_max = std::min(n_max, kMaxNgram);
  std::vector<std::vector<std::string>> ref_tokens;
  ref_tokens.reserve(refs.size());
  for (const auto& r : refs) ref_tokens.push_back(tokenize(r));

  double total = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const TfIdf hyp = tfidf(count_ngrams(cand, n), n, idf);
    double sum = 0.0;
    for (const auto& rt : ref_tokens) {
      const TfIdf ref = tfidf(count_ngrams(rt, n), n, idf);
      double dot = 0.0;
      for (const auto& [g, w] : hyp.vec) {
        const auto it = ref.vec.find(g);
        if (it != ref.vec.end()) dot += std::min(w, it->second) * it->second;
      }
      double sim = 0.0;
      if (hyp.norm > 0.0 && ref.norm > 0.0) sim = dot / (hyp.norm * ref.norm);
      const double delta = static_cast<double>(cand.size()) - static_cast<double>(rt.size());
      sum += sim * std::exp(-(delta * delta) / (2.0 * sigma * sigma));
    }
    total += 10.0 * sum / static_cast<double>(ref_tokens.size());
  }
  return total / static_cast<double>(n_max);
}

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "a",     "about", "above", "after", "again", "all",   "also",  "am",    "an",    "and",   "any",
      "are",   "as",    "at",    "be",    "been",  "being", "but",   "by",    "can",   "could", "did",
      "do",    "does",  "doing", "during", "each", "for",   "from",  "had",   "has",   "have",  "having",
      "he",    "her",   "here",  "hers",  "him",   "his",   "how",   "i",     "if",    "in",    "into",
      "is",    "it",    "its",   "itself", "just", "me",    "more",  "most",  "my",    "no",    "nor",
      "not",   "of",    "off",   "on",    "once",  "only",  "or",    "other", "our",   "out",   "over",
      "own",   "same",  "she",   "should", "so",   "some",  "such",  "than",  "that",  "the",   "their",
      "them",  "then",  "there", "these", "they",  "this",  "those", "through", "to",  "too",   "under",
      "until", "up",    "very",  "was",   "we",    "were",  "what",  "when",  "where", "which", "while",
      "who",   "whom",  "why",   "will",  "with",  "would", "you",   "your",
  };
  return words;
}

std::string stem(std::string_view w) {
  auto strip = [&](std::string_view suffix) -> bool {
    return w.size() >= suffix.size() + 4 && w.ends_with(suffix);
  };
  if (strip("ing")) return std::string(w.substr(0, w.size() - 3));
  if (strip("ed")) return std::string(w.substr(0, w.size() - 2));
  if (strip("es")) {
    const auto base = w.substr(0, w.size() - 2);
    if (base.ends_with('s') || base.ends_with('x') || base.ends_with('z') || base.ends_with("ch") ||
        base.ends_with("sh")) {
      return std::string(base);
    }
  }
  if (strip("s") && !w.ends_with("ss")) return std::string(w.substr(0, w.size() - 1));
  return std::string(w);
}

std::set<std::string> content_words(std::string_view text) {
  std::set<std::string> out;
  const auto& stop = stopwords();
  for (const auto& t : tokenize(text)) {
    if (!stop.contains(t)) out.insert(stem(t));
  }
  return out;
}

double spice_proxy(std::string_view candidate, std::span<const std::string> refs) {
  const auto cand = content_words(candidate);
  std::set<std::string> ref;
  for (const auto& r : refs) ref.merge(content_words(r));
  if (cand.empty() || ref.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& w : cand) common += ref.contains(w) ? 1 : 0;
  if (common == 0) return 0.0;
  const double p = static_cast<double>(common) / static_cast<double>(cand.size());
  const double r = static_cast<double>(common) / static_cast<double>(ref.size());
  return 2.0 * p * r / (p + r);
}

double spider(double cider, double spice) { return (cider / 10.0 + spice) / 2.0; }

CaptionScores score_caption(std::string_view candidate, std::span<const std::string> refs, const CorpusIdf& idf) {
  CaptionScores s;
  s.rouge_l = rouge_l(candidate, refs);
  s.cider_d = cider_d(candidate, refs, idf);
  s.spice = spice_proxy(candidate, refs);
  s.spider = spider(s.cider_d, s.spice);
  return s;
}

}  // namespace tadacap::eval
