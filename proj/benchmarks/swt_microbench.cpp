#include <benchmark/benchmark.h>

#include <random>

#include "swt/bench.hpp"
#include "swt/sfcrf.hpp"
#include "swt/transform.hpp"

namespace {

using namespace swt;

TemplateConfig config(const benchmark::State& state) {
    const int h = static_cast<int>(state.range(0));
    const int m = static_cast<int>(state.range(1));
    return {m, m, 1, ErpGridSpec(h, 2 * h)};
}

FeatureMap features(int h, int w, int c) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    FeatureMap f(h, w, c);
    for (float& v : f.values()) {
        v = d(rng);
    }
    return f;
}

void BM_IndexMapFast(benchmark::State& state) {
    const TemplateConfig cfg = config(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_index_map_fast(cfg));
    }
}
BENCHMARK(BM_IndexMapFast)->ArgsProduct({{128, 256, 512}, {4, 8, 16}})->Unit(benchmark::kMillisecond);

void BM_IndexMapNaive(benchmark::State& state) {
    const TemplateConfig cfg = config(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_index_map_naive(cfg));
    }
}
BENCHMARK(BM_IndexMapNaive)->ArgsProduct({{128, 256}, {4, 8}})->Unit(benchmark::kMillisecond);

void BM_TangentGrids(benchmark::State& state) {
    const ErpGridSpec grid(static_cast<int>(state.range(0)), 2 * static_cast<int>(state.range(0)));
    const int k = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tangent_grids_all_pixels(grid, k));
    }
}
BENCHMARK(BM_TangentGrids)->ArgsProduct({{128}, {3, 5, 7, 9}})->Unit(benchmark::kMillisecond);

void BM_SampleNearest(benchmark::State& state) {
    const TemplateConfig cfg = config(state);
    const IndexMap map = build_index_map_fast(cfg);
    const FeatureMap f = features(cfg.grid.height, cfg.grid.width, 16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample(f, map));
    }
}
BENCHMARK(BM_SampleNearest)->Args({128, 8})->Args({256, 8})->Unit(benchmark::kMillisecond);

void BM_PsiForward(benchmark::State& state) {
    const int c = static_cast<int>(state.range(1));
    const TemplateConfig cfg{4, 4, 1, ErpGridSpec(static_cast<int>(state.range(0)), 2 * static_cast<int>(state.range(0)))};
    const IndexMap map = build_index_map_fast(cfg);
    const FeatureMap f = features(cfg.grid.height, cfg.grid.width, c);
    std::mt19937_64 rng(11);
    const BlockParams bp = init_block_params(c, default_head_count(c), 4, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(psi_forward(f, bp.attn, map));
    }
}
BENCHMARK(BM_PsiForward)->Args({16, 64})->Args({32, 32})->Unit(benchmark::kMillisecond);

void BM_DecoderForward(benchmark::State& state) {
    DecoderConfig cfg;
    const int h = static_cast<int>(state.range(0));
    const auto pyramid = random_pyramid(h, 2 * h, cfg, 3);
    const DecoderParams params = init_decoder_params(cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decoder_forward(pyramid, cfg, params));
    }
}
BENCHMARK(BM_DecoderForward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
