// Kernel benchmarks for the shapes the encoder actually hits.

#include <benchmark/benchmark.h>

#include "dsn/tensor.hpp"

namespace {

template <class T>
void fill_pattern(dsn::num::Tensor<T>& t) {
    for (int64_t i = 0; i < t.size(); ++i) t.data[i] = static_cast<T>((i % 13) - 6) * T(0.07);
}

template <class T>
void BM_matmul_tokens(benchmark::State& state) {
    const int rows = static_cast<int>(state.range(0));
    dsn::num::Tensor<T> a(rows, 163), b(163, 128), c(rows, 128);
    fill_pattern(a);
    fill_pattern(b);
    for (auto _ : state) {
        c.zero();
        dsn::num::mm_nn(a, b, c);
        benchmark::DoNotOptimize(c.ptr());
    }
    state.SetItemsProcessed(state.iterations() * 2 * int64_t(rows) * 163 * 128);
}
BENCHMARK(BM_matmul_tokens<float>)->Arg(20)->Arg(64);
BENCHMARK(BM_matmul_tokens<double>)->Arg(20)->Arg(64);

template <class T>
void BM_matmul_nt_scores(benchmark::State& state) {
    dsn::num::Tensor<T> q(1, 32), k(20, 32), s(1, 20);
    fill_pattern(q);
    fill_pattern(k);
    for (auto _ : state) {
        s.zero();
        dsn::num::mm_nt(q, k, s);
        benchmark::DoNotOptimize(s.ptr());
    }
}
BENCHMARK(BM_matmul_nt_scores<float>);

}  // namespace
