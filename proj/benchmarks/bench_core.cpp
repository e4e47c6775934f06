#include <benchmark/benchmark.h>

#include "ifadit/config.hpp"
#include "ifadit/flow.hpp"
#include "ifadit/graph.hpp"
#include "ifadit/metrics.hpp"
#include "ifadit/mlp.hpp"
#include "ifadit/pipeline.hpp"
#include "ifadit/rng.hpp"

namespace {

using namespace ifadit;

void bm_matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    Tensor a({8, n});
    Tensor w({n, n});
    for (auto& v : a.data) v = rng.normal();
    for (auto& v : w.data) v = rng.normal();
    Var wa = constant(w);
    for (auto _ : state) {
        Var out = matmul(constant(a), wa);
        benchmark::DoNotOptimize(out.value().data.data());
    }
    state.SetItemsProcessed(state.iterations() * 2 * 8 * n * n);
}
BENCHMARK(bm_matmul)->Arg(128)->Arg(256)->Arg(1024);

void bm_sif_round_trip(benchmark::State& state) {
    Rng rng(2);
    SifModel sif = SifModel::init(8, 64, 64, 128, 2.0, rng, false, FlowInit::random_full);
    Tensor z({8, 64});
    Tensor k({8, 64});
    for (auto& v : z.data) v = rng.normal();
    for (auto& v : k.data) v = rng.normal();
    Var kv = constant(k);
    for (auto _ : state) {
        Var out = sif_inverse(sif, sif_forward(sif, constant(z), kv), kv);
        benchmark::DoNotOptimize(out.value().data.data());
    }
}
BENCHMARK(bm_sif_round_trip);

void bm_ssim(benchmark::State& state) {
    Rng rng(3);
    Tensor x({4, 32 * 32});
    Tensor y({4, 32 * 32});
    for (auto& v : x.data) v = rng.uniform();
    for (auto& v : y.data) v = rng.uniform();
    for (auto _ : state) {
        Var s = ssim_graph(constant(x), constant(y), 32, 32);
        benchmark::DoNotOptimize(s.value().data.data());
    }
}
BENCHMARK(bm_ssim);

void bm_anonymize_batch(benchmark::State& state) {
    Config cfg;
    PipelineModel model = PipelineModel::init(cfg);
    Rng rng(4);
    Tensor images({4, cfg.pixels()});
    for (auto& v : images.data) v = rng.uniform();
    const Secret secret = Secret::from_string("bench");
    for (auto _ : state) {
        Tensor out = anonymize(model, images, secret);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(bm_anonymize_batch);

}  // namespace

BENCHMARK_MAIN();
