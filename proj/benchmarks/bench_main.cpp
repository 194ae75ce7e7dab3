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
#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "tadacap/diverse_select.hpp"
#include "tadacap/domain_db.hpp"
#include "tadacap/embeddings.hpp"
#include "tadacap/eval_metrics.hpp"
#include "tadacap/synthgen.hpp"

namespace {

using namespace tadacap;

std::vector<embed::EmbeddingVector> random_embeddings(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<embed::EmbeddingVector> out(n);
  for (auto& v : out) {
    v.values.resize(d);
    for (auto& x : v.values) x = g(rng);
    embed::normalize(v);
  }
  return out;
}

// Greedy MAP over N items, k = 4; expected O(N k^2) after the kernel.
void BM_GreedySelect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto kernel = embed::build_kernel(random_embeddings(n, 32, 1));
  for (auto _ : state) benchmark::DoNotOptimize(dpp::greedy_map_select(kernel, 4));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GreedySelect)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oN);

void BM_BuildKernel(benchmark::State& state) {
  const auto vs = random_embeddings(static_cast<std::size_t>(state.range(0)), 32, 2);
  for (auto _ : state) benchmark::DoNotOptimize(embed::build_kernel(vs));
}
BENCHMARK(BM_BuildKernel)->Arg(200)->Arg(1000);

void BM_Featurize(benchmark::State& state) {
  synth::StockParams p;
  p.sigma = 0.01;
  p.kappa = 0.01;
  p.length = static_cast<std::size_t>(state.range(0));
  p.seed = 3;
  const auto series = synth::gen_stock_series(p);
  for (auto _ : state) benchmark::DoNotOptimize(embed::builtin_featurize(series));
}
BENCHMARK(BM_Featurize)->Arg(128)->Arg(1024);

void BM_GenDataset(benchmark::State& state) {
  synth::DatasetOptions opt;
  opt.render = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth::gen_dataset(synth::DatasetKind::stock, 50, 4, opt));
}
BENCHMARK(BM_GenDataset)->Arg(0)->Arg(1);

void BM_CiderCorpus(benchmark::State& state) {
  synth::DatasetOptions opt;
  opt.render = false;
  const auto samples = synth::gen_dataset(synth::DatasetKind::stock, 200, 5, opt);
  std::vector<std::vector<std::string>> refs;
  for (const auto& s : samples) refs.push_back(s.in_domain);
  for (auto _ : state) {
    const auto idf = eval::compute_idf(refs);
    double total = 0.0;
    for (std::size_t i = 0; i < refs.size(); ++i) total += eval::cider_d(refs[(i + 1) % refs.size()][0], refs[i], idf);
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_CiderCorpus);

}  // namespace

BENCHMARK_MAIN();
