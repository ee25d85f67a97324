#include <benchmark/benchmark.h>

#include "cat/discovery.hpp"
#include "cat/synthesis.hpp"

namespace {

cat::ToyGeneratorSpec bench_spec() {
    cat::ToyGeneratorSpec spec;
    spec.latent = cat::LatentConfig{4, 64, 0};
    spec.attributes = {cat::ToyAttribute{
        "target", cat::LayerRange{2, 2}, {5, 12, 23, 34, 45, 56}, 3.0, 0.1, 1.5}};
    spec.noise = 0.1;
    spec.extra_features = 0;
    spec.feature_seed = 1;
    return spec;
}

// Full discovery sweep; the pairwise scans dominate, so cost grows
// quadratically with the seed count.
void BM_discover(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto [pos, neg] = cat::make_toy_seed_sets(bench_spec(), "target", n, n, 1);
    const cat::Thresholds thresholds;
    for (auto _ : state) {
        cat::AttributeSignature sig = cat::discover(pos, neg, cat::LayerRange{0, 3}, thresholds);
        benchmark::DoNotOptimize(sig);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n);
}

void BM_pairwise_similar(benchmark::State& state) {
    const auto [pos, neg] = cat::make_toy_seed_sets(bench_spec(), "target", 2, 0, 1);
    for (auto _ : state) {
        cat::DimensionMask mask =
            cat::pairwise_similar_dims(pos.members[0], pos.members[1], 2, 2.0);
        benchmark::DoNotOptimize(mask);
    }
}

} // namespace

BENCHMARK(BM_discover)->Arg(8)->Arg(20)->Arg(40);
BENCHMARK(BM_pairwise_similar);

BENCHMARK_MAIN();
