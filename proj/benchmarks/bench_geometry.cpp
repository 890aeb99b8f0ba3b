#include <benchmark/benchmark.h>

#include <random>

#include "homography_oracles.hpp"
#include "platesift/homography.hpp"

namespace {

using namespace platesift;

void BM_Dlt(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto corrs =
        testing::exact_correspondences(testing::random_homography(rng), static_cast<int>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(geometry::dlt_homography(corrs));
}
BENCHMARK(BM_Dlt)->Arg(4)->Arg(16)->Arg(64);

void BM_RobustFit(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const Eigen::Matrix3d truth = testing::random_homography(rng);
    const int inliers = 30;
    const int outliers = static_cast<int>(state.range(0)) * inliers / 100;
    auto corrs = testing::exact_correspondences(truth, inliers, rng);
    testing::append_outliers(corrs, truth, outliers, 10.0, rng);
    for (auto _ : state) benchmark::DoNotOptimize(geometry::robust_fit(corrs));
}
BENCHMARK(BM_RobustFit)->Arg(0)->Arg(30)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace
