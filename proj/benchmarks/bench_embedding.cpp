#include "generators.hpp"

#include <toolweaver/tool_registry.hpp>

#include <benchmark/benchmark.h>

using namespace toolweaver;

static void BM_HashingEmbedder(benchmark::State& state) {
    const std::string text(static_cast<std::size_t>(state.range(0)), 'x');
    for (auto _ : state) benchmark::DoNotOptimize(hashing_embedder(text, 256));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_HashingEmbedder)->Arg(16)->Arg(128)->Arg(1024);

static void BM_Deduplicate(benchmark::State& state) {
    Rng rng(1);
    std::vector<ToolSpec> tools;
    for (int i = 0; i < state.range(0); ++i) tools.push_back(tw_test::random_spec(rng, 3));
    HashingEmbedder embedder(256);
    for (auto _ : state) benchmark::DoNotOptimize(deduplicate(tools, embedder, 0.8));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Deduplicate)->RangeMultiplier(4)->Range(16, 1024)->Complexity();
