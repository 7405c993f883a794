#include "generators.hpp"

#include <toolweaver/validation.hpp>

#include <benchmark/benchmark.h>

using namespace toolweaver;

static void BM_ValidateFormat(benchmark::State& state) {
    Rng rng(3);
    std::vector<ToolSpec> specs;
    std::vector<ToolCallInput> inputs;
    std::vector<ToolOutput> outputs;
    for (int i = 0; i < 256; ++i) {
        specs.push_back(tw_test::random_spec(rng, static_cast<std::size_t>(state.range(0))));
        inputs.push_back({specs.back().id(), tw_test::random_valid_arguments(rng, specs.back())});
        outputs.push_back(placeholder_output(specs.back()));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(validate_format(specs[i], inputs[i], outputs[i]));
        i = (i + 1) % specs.size();
    }
}
BENCHMARK(BM_ValidateFormat)->Arg(2)->Arg(8)->Arg(32);

static void BM_CanonicalSerialize(benchmark::State& state) {
    Rng rng(4);
    const ToolSpec s = tw_test::random_spec(rng, 10);
    for (auto _ : state) benchmark::DoNotOptimize(canonical_serialize(s));
}
BENCHMARK(BM_CanonicalSerialize);
