#include <benchmark/benchmark.h>

#include "platesift/sift.hpp"
#include "test_support.hpp"

namespace {

using namespace platesift;

void BM_GaussianBlur(benchmark::State& state) {
    const auto img = testing::textured_image(256, 256, 1);
    const double sigma = static_cast<double>(state.range(0)) / 10.0;
    for (auto _ : state) benchmark::DoNotOptimize(gaussian_blur(img, sigma));
}
BENCHMARK(BM_GaussianBlur)->Arg(8)->Arg(16)->Arg(40);

void BM_ScaleSpace(benchmark::State& state) {
    const auto side = static_cast<int>(state.range(0));
    const auto img = testing::textured_image(side, side, 2);
    for (auto _ : state) benchmark::DoNotOptimize(sift::build_scale_space(img));
}
BENCHMARK(BM_ScaleSpace)->Arg(128)->Arg(256);

void BM_ExtractFeatures(benchmark::State& state) {
    const auto side = static_cast<int>(state.range(0));
    const auto img = testing::textured_image(side, side, 3);
    std::size_t n = 0;
    for (auto _ : state) {
        const auto f = sift::extract_features(img);
        n = f.size();
        benchmark::DoNotOptimize(f.data());
    }
    state.counters["features"] = static_cast<double>(n);
}
BENCHMARK(BM_ExtractFeatures)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
