#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "cat/metrics.hpp"

namespace {

double next_unit(std::uint64_t& state) {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) / 9007199254740992.0;
}

// O(n^2) pairwise distances dominate.
void BM_distance_correlation(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::uint64_t rng = 42;
    std::vector<std::vector<double>> X(n, std::vector<double>(16));
    std::vector<int> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& x : X[i]) x = next_unit(rng);
        z[i] = next_unit(rng) < 0.5 ? 0 : 1;
    }
    z[0] = 0;
    z[1] = 1;
    for (auto _ : state) benchmark::DoNotOptimize(cat::distance_correlation_sq(X, z));
    state.SetComplexityN(static_cast<std::int64_t>(n));
}

void BM_average_precision(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::uint64_t rng = 7;
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = next_unit(rng);
        labels[i] = next_unit(rng) < 0.3 ? 1 : 0;
    }
    labels[0] = 1;
    for (auto _ : state) benchmark::DoNotOptimize(cat::average_precision(scores, labels));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_kl_score_divergence(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::uint64_t rng = 11;
    cat::PredictionTable pred;
    pred.attributes = {"A"};
    for (std::size_t i = 0; i < n; ++i) {
        pred.ids.push_back("r" + std::to_string(i));
        pred.groups.push_back(static_cast<int>(i % 2));
        pred.labels.push_back({static_cast<std::uint8_t>(next_unit(rng) < 0.4 ? 1 : 0)});
        pred.scores.push_back({next_unit(rng)});
    }
    for (auto _ : state) benchmark::DoNotOptimize(cat::kl_score_divergence(pred, "A"));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

} // namespace

BENCHMARK(BM_distance_correlation)->Arg(64)->Arg(128)->Arg(256)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_average_precision)->Arg(1000)->Arg(10000);
BENCHMARK(BM_kl_score_divergence)->Arg(1000)->Arg(10000);
