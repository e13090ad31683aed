#include <benchmark/benchmark.h>

#include <random>

#include "arfdx/imaging.hpp"

namespace {

arfdx::GrayImage noise(std::size_t w, std::size_t h) {
  auto img = arfdx::GrayImage::filled(w, h, 0);
  std::mt19937_64 rng(3);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

}  // namespace

static void BM_HistogramEqualize(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto img = noise(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(arfdx::histogram_equalize(img));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_HistogramEqualize)->Arg(256)->Arg(1024);

static void BM_ResizeShortSide(benchmark::State& state) {
  const auto img = noise(1200, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(arfdx::resize_short_side(img, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_ResizeShortSide)->Arg(224)->Arg(512);

static void BM_Preprocess(benchmark::State& state) {
  const auto img = noise(1200, 1000);
  arfdx::ImageConfig cfg;
  cfg.crop_mode = arfdx::CropMode::kRandomTrain;
  arfdx::Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(arfdx::preprocess(img, cfg, rng));
}
BENCHMARK(BM_Preprocess)->Unit(benchmark::kMillisecond);
