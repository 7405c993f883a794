#include "generators.hpp"

#include <toolweaver/gateway.hpp>
#include <toolweaver/tool_registry.hpp>

#include <benchmark/benchmark.h>

using namespace toolweaver;

static void BM_GatewayCacheHit(benchmark::State& state) {
    auto registry = std::make_shared<ToolRegistry>(std::vector<ToolSpec>{tw_test::weather_tool()});
    Gateway gateway(tw_test::world_mock(), registry);
    SimRequest req;
    req.tool_id = tw_test::weather_tool().id();
    req.arguments = {{"city", "Oslo"}, {"days", 3}};
    gateway.simulate(req);
    for (auto _ : state) benchmark::DoNotOptimize(gateway.simulate(req));
}
BENCHMARK(BM_GatewayCacheHit)->ThreadRange(1, 8);

static void BM_GatewayMiss(benchmark::State& state) {
    auto registry = std::make_shared<ToolRegistry>(std::vector<ToolSpec>{tw_test::weather_tool()});
    Gateway gateway(tw_test::world_mock(), registry, {.cache_capacity = 1});
    SimRequest req;
    req.tool_id = tw_test::weather_tool().id();
    std::int64_t i = 0;
    for (auto _ : state) {
        req.arguments = {{"city", "c" + std::to_string(i++)}};
        benchmark::DoNotOptimize(gateway.simulate(req));
    }
}
BENCHMARK(BM_GatewayMiss);

static void BM_CacheKey(benchmark::State& state) {
    const ToolSpec t = tw_test::weather_tool();
    const Json args = {{"city", "Oslo"}, {"days", 3}, {"units", "metric"}};
    for (auto _ : state) benchmark::DoNotOptimize(cache_key(t, args, {}, std::nullopt));
}
BENCHMARK(BM_CacheKey);
