#include <benchmark/benchmark.h>

#include "arfdx/models.hpp"

namespace {

arfdx::Batch random_batch(const arfdx::ModelSpec& spec, Eigen::Index n) {
  arfdx::Batch b;
  b.ehr = Eigen::MatrixXd::Random(n, static_cast<Eigen::Index>(spec.ehr_dim));
  b.emb = Eigen::MatrixXd::Random(n, static_cast<Eigen::Index>(spec.emb_dim));
  b.labels = (Eigen::MatrixXd::Random(n, 3).array() > 0).cast<double>();
  return b;
}

const arfdx::ModelKind kKinds[] = {arfdx::ModelKind::kEhrLinear, arfdx::ModelKind::kEhrTwoLayer,
                                   arfdx::ModelKind::kImageLinear, arfdx::ModelKind::kCombinedDirect,
                                   arfdx::ModelKind::kCombinedHidden};

arfdx::ModelSpec spec_for(int k) { return {kKinds[k], 200, 64, 100}; }

}  // namespace

static void BM_Forward(benchmark::State& state) {
  const auto spec = spec_for(static_cast<int>(state.range(0)));
  const auto params = arfdx::init_params(spec, 5);
  const auto batch = random_batch(spec, 32);
  state.SetLabel(std::string(arfdx::to_string(spec.kind)));
  for (auto _ : state) benchmark::DoNotOptimize(arfdx::forward(spec, params, batch.ehr, batch.emb));
}
BENCHMARK(BM_Forward)->DenseRange(0, 4);

static void BM_Backward(benchmark::State& state) {
  const auto spec = spec_for(static_cast<int>(state.range(0)));
  const auto params = arfdx::init_params(spec, 5);
  const auto batch = random_batch(spec, 32);
  state.SetLabel(std::string(arfdx::to_string(spec.kind)));
  for (auto _ : state) benchmark::DoNotOptimize(arfdx::backward(spec, params, batch));
}
BENCHMARK(BM_Backward)->DenseRange(0, 4);
