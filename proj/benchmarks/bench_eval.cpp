#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "arfdx/eval.hpp"

namespace {

void make_scores(std::size_t n, std::vector<double>& scores, std::vector<int>& labels) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  scores.resize(n);
  labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = u(rng) < 0.3;
    scores[i] = 0.4 * labels[i] + u(rng);
  }
}

}  // namespace

static void BM_Auroc(benchmark::State& state) {
  std::vector<double> s;
  std::vector<int> y;
  make_scores(static_cast<std::size_t>(state.range(0)), s, y);
  for (auto _ : state) benchmark::DoNotOptimize(arfdx::auroc(s, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auroc)->RangeMultiplier(10)->Range(100, 100000);

static void BM_Aupr(benchmark::State& state) {
  std::vector<double> s;
  std::vector<int> y;
  make_scores(static_cast<std::size_t>(state.range(0)), s, y);
  for (auto _ : state) benchmark::DoNotOptimize(arfdx::aupr(s, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Aupr)->RangeMultiplier(10)->Range(100, 100000);
