// Temporal store lookups and walk sampling at trust-network scale.

#include <benchmark/benchmark.h>

#include "dsn/synth.hpp"
#include "dsn/temporal_store.hpp"

namespace {

using namespace dsn;

const EventStream& stream() {
    static EventStream s = [] {
        SynthSpec spec;
        spec.nodes = 1000;
        spec.events = 30000;
        spec.days = 2000;
        spec.seed = 3;
        return generate_synthetic_stream(spec);
    }();
    return s;
}

const TemporalStore& store() {
    static TemporalStore st(1000);
    static bool filled = [] {
        for (const auto& e : stream()) st.insert(e);
        return true;
    }();
    (void)filled;
    return st;
}

void BM_recent_neighbors(benchmark::State& state) {
    const auto& s = stream();
    size_t i = 0;
    for (auto _ : state) {
        const auto& e = s[i++ % s.size()];
        benchmark::DoNotOptimize(store().recent_neighbors(e.src, e.time, 20, e.stream_index));
    }
}
BENCHMARK(BM_recent_neighbors);

void BM_sample_walks(benchmark::State& state) {
    const auto& s = stream();
    std::mt19937_64 rng(1);
    size_t i = 0;
    for (auto _ : state) {
        const auto& e = s[i++ % s.size()];
        benchmark::DoNotOptimize(
            store().sample_walks(e.src, e.time, 10, 2, 1.0, rng, e.stream_index));
    }
}
BENCHMARK(BM_sample_walks);

}  // namespace
