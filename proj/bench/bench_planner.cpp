#include "clockgen/freq_planner.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace clockgen;

namespace {

std::vector<Rational> make_targets(std::size_t n)
{
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<long> hz(5000000, 200000000);
    std::uniform_int_distribution<long> frac(0, 999999);
    std::vector<Rational> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rational t(BigInt(hz(rng)));
        t += Rational(BigInt(frac(rng)), BigInt(1000000));
        t.canonicalize();
        if (t > 200000000) t = Rational(BigInt(200000000));
        out.push_back(t);
    }
    return out;
}

const Rational kFin(BigInt(25000000));

void BM_PlanSerial(benchmark::State& state)
{
    const auto targets = make_targets(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto r = plan_frequencies_serial(kFin, targets, 0);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PlanParallel(benchmark::State& state)
{
    const auto targets = make_targets(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto r = plan_frequencies(kFin, targets, 0);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_PlanSerial)->Arg(64)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PlanParallel)->Arg(64)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
