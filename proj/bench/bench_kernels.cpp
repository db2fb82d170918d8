// Serial reference kernels against the OpenMP versions. Thread count
// follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "lesionseg/enhance.hpp"
#include "lesionseg/kernels.hpp"
#include "lesionseg/morphology.hpp"
#include "lesionseg/reference.hpp"
#include "lesionseg/unet.hpp"
#include "lesionseg/weights.hpp"
#include "test_support.hpp"

using namespace lesionseg;

namespace {

// A 3x3 conv at the size of the first encoder stage of the standard network.
struct ConvCase {
    Tensor x, w, b;
    explicit ConvCase(std::size_t cin, std::size_t cout, std::size_t size)
    {
        std::mt19937 rng(1);
        x = testing::random_tensor(rng, {cin, size, size});
        w = testing::random_tensor(rng, {cout, cin, 3, 3});
        b = testing::random_tensor(rng, {cout});
    }
};

void BM_conv2d_reference(benchmark::State& state)
{
    const ConvCase c(state.range(0), state.range(0), 64);
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::conv2d(c.x, c.w, c.b, 1));
}

void BM_conv2d_omp(benchmark::State& state)
{
    const ConvCase c(state.range(0), state.range(0), 64);
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::conv2d(c.x, c.w, c.b, 1));
}

void BM_upconv2_reference(benchmark::State& state)
{
    std::mt19937 rng(2);
    const Tensor x = testing::random_tensor(rng, {64, 32, 32});
    const Tensor w = testing::random_tensor(rng, {64, 32, 2, 2});
    const Tensor b = testing::random_tensor(rng, {32});
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::upconv2(x, w, b));
}

void BM_upconv2_omp(benchmark::State& state)
{
    std::mt19937 rng(2);
    const Tensor x = testing::random_tensor(rng, {64, 32, 32});
    const Tensor w = testing::random_tensor(rng, {64, 32, 2, 2});
    const Tensor b = testing::random_tensor(rng, {32});
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::upconv2(x, w, b));
}

void BM_morphology_reference(benchmark::State& state)
{
    std::mt19937 rng(3);
    const BinaryMask m = testing::random_blobs(rng, 512, 512);
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::dilate(reference::erode(m, 5), 5));
}

void BM_morphology_omp(benchmark::State& state)
{
    std::mt19937 rng(3);
    const BinaryMask m = testing::random_blobs(rng, 512, 512);
    for (auto _ : state)
        benchmark::DoNotOptimize(dilate(erode(m, 5), 5));
}

void BM_texture_reference(benchmark::State& state)
{
    std::mt19937 rng(4);
    const PlaneF32 gray = intensity(testing::synthetic_lesion(rng, 600, 450));
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::fractional_magnitude(gray, TextureConfig{}));
}

void BM_texture_omp(benchmark::State& state)
{
    std::mt19937 rng(4);
    const PlaneF32 gray = intensity(testing::synthetic_lesion(rng, 600, 450));
    for (auto _ : state)
        benchmark::DoNotOptimize(fractional_magnitude(gray, TextureConfig{}));
}

void BM_forward_tiny(benchmark::State& state)
{
    const UNet net(load_weights(testing::fixture("tiny_unet.unetw")));
    const Tensor x = testing::analytic_input();
    for (auto _ : state)
        benchmark::DoNotOptimize(net.logits(x));
}

}  // namespace

BENCHMARK(BM_conv2d_reference)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv2d_omp)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_upconv2_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_upconv2_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_morphology_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_morphology_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_texture_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_texture_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forward_tiny)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
