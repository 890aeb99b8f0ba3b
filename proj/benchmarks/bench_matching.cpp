#include <benchmark/benchmark.h>

#include <random>

#include "matching_oracle.hpp"
#include "platesift/matching.hpp"

namespace {

using namespace platesift;

void BM_MatchDescriptors(benchmark::State& state) {
    std::mt19937_64 rng(9);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<sift::Descriptor> templ, query;
    for (std::size_t i = 0; i < n; ++i) templ.push_back(testing::random_descriptor(rng));
    for (std::size_t i = 0; i < n; ++i) query.push_back(testing::perturb(templ[(i * 5) % n], 0.03, rng));
    for (auto _ : state) benchmark::DoNotOptimize(match::match_descriptors(query, templ));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatchDescriptors)->RangeMultiplier(2)->Range(32, 512)->Complexity(benchmark::oNSquared);

}  // namespace
