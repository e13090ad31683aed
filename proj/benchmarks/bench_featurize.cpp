#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "arfdx/featurize.hpp"

static void BM_Encode(benchmark::State& state) {
  const auto vars = static_cast<std::size_t>(state.range(0));
  arfdx::FeaturizerConfig cfg;
  for (std::size_t v = 0; v < vars; ++v) cfg.numeric_vars.push_back("var" + std::to_string(v));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  std::vector<arfdx::WindowValues> rows(500);
  for (auto& r : rows)
    for (const auto& name : cfg.numeric_vars)
      if (n01(rng) > -1.0) r[name] = n01(rng);
  const auto fitted = arfdx::fit(rows, cfg);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(arfdx::encode(rows[i], fitted));
    i = (i + 1) % rows.size();
  }
}
BENCHMARK(BM_Encode)->Arg(10)->Arg(40)->Arg(160);
