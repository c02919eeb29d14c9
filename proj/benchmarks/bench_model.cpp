// Full-dimension query encoding and one training epoch.

#include <benchmark/benchmark.h>

#include "dsn/pipeline.hpp"
#include "dsn/synth.hpp"

namespace {

using namespace dsn;

EventStream bench_stream(int nodes, int events) {
    SynthSpec spec;
    spec.nodes = nodes;
    spec.events = events;
    spec.days = events / 12;
    spec.seed = 3;
    return generate_synthetic_stream(spec);
}

void BM_encode_query(benchmark::State& state) {
    ExperimentConfig cfg;  // full default dimensions
    EventStream s = bench_stream(500, 20000);
    Model<float> model(cfg, 500, 1);
    TemporalStore store(500);
    MemoryEngine<float> engine(model.memory_params(), model.config(), 500);
    for (const auto& e : s) store.insert(e);
    for (size_t i = 0; i < 5000; ++i) engine.apply_now(s[i]);
    ConstMemoryReader<float> reader(engine.state());
    StaticLookupCtx ctx;
    size_t i = 5000;
    for (auto _ : state) {
        const auto& e = s[i];
        if (++i >= 15000) i = 5000;
        QueryRngs rngs = QueryRngs::make(7, e.stream_index, 0);
        num::Tape<float> tape;
        auto out = model.predict_query(tape, store, reader, e.src, e.dst, e.time,
                                       e.stream_index, ctx, rngs, false);
        benchmark::DoNotOptimize(tape.val(out.probs).ptr());
    }
}
BENCHMARK(BM_encode_query)->Unit(benchmark::kMicrosecond);

void BM_train_epoch(benchmark::State& state) {
    ExperimentConfig cfg;
    cfg.threads = static_cast<int>(state.range(0));
    EventStream s = bench_stream(400, 3000);
    auto cut = chronological_split(s);
    SplitSpec split = apply_mask(s, cut, {}, 0, 0.0);
    Trainer<float> trainer(cfg, s, split, 400, 1);
    for (auto _ : state) {
        trainer.train_epoch(1);
        benchmark::DoNotOptimize(trainer.last_epoch_queries());
    }
    state.SetItemsProcessed(state.iterations() * trainer.last_epoch_queries());
}
BENCHMARK(BM_train_epoch)->Arg(1)->Arg(2)->Unit(benchmark::kSecond);

}  // namespace

BENCHMARK_MAIN();
