#include <benchmark/benchmark.h>

#include "detector_oracles.hpp"
#include "plate_oracles.hpp"
#include "platesift/detector.hpp"
#include "platesift/pipeline.hpp"
#include "platesift/synth.hpp"

namespace {

using namespace platesift;

const registry::Registry& builtin_registry() {
    static const auto reg = [] {
        registry::Registry r;
        for (const auto& w : synth::builtin_templates()) r = registry::enroll(r, w.label, w.image);
        return r;
    }();
    return reg;
}

void BM_DetectCandidates(benchmark::State& state) {
    std::mt19937_64 rng(4);
    const auto frame = testing::random_frame(rng);
    for (auto _ : state) benchmark::DoNotOptimize(detect::detect_candidates(frame));
}
BENCHMARK(BM_DetectCandidates)->Unit(benchmark::kMicrosecond);

void BM_RecognizeSpecial(benchmark::State& state) {
    const auto words = synth::builtin_templates();
    const auto plate = testing::paste_template(words[static_cast<std::size_t>(state.range(0))].image, 8.0, 1.1).image;
    const auto& reg = builtin_registry();
    for (auto _ : state) benchmark::DoNotOptimize(recognition::recognize(plate, reg));
}
BENCHMARK(BM_RecognizeSpecial)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_RecognizeNormal(benchmark::State& state) {
    std::mt19937_64 rng(5);
    const auto plate = synth::render_normal_plate("WXM 4821", rng);
    const auto& reg = builtin_registry();
    for (auto _ : state) benchmark::DoNotOptimize(recognition::recognize(plate, reg));
}
BENCHMARK(BM_RecognizeNormal)->Unit(benchmark::kMillisecond);

}  // namespace
