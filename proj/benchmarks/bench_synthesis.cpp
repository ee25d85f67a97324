#include <benchmark/benchmark.h>

#include "cat/planner.hpp"
#include "cat/synthesis.hpp"

namespace {

cat::ToyGeneratorSpec bench_spec() {
    cat::ToyGeneratorSpec spec;
    spec.latent = cat::LatentConfig{4, 64, 0};
    spec.attributes = {
        cat::ToyAttribute{"Male", cat::LayerRange{1, 1}, {0, 1, 2, 3, 4, 5}, 3.0, 0.1, 1.5},
        cat::ToyAttribute{"Blond_Hair", cat::LayerRange{2, 2}, {0, 1, 2, 3, 4, 5}, 3.0, 0.1,
                          1.5},
    };
    spec.noise = 0.1;
    spec.extra_features = 4;
    spec.feature_seed = 7;
    return spec;
}

cat::AttributeSignature exact_signature(const cat::ToyGeneratorSpec& spec,
                                        const std::string& name, cat::SeedSet donors) {
    const cat::ToyAttribute& attr = spec.attribute(name);
    cat::AttributeSignature sig;
    sig.label = name;
    sig.layer_range = attr.control_layers;
    for (int layer = attr.control_layers.lo; layer <= attr.control_layers.hi; ++layer)
        sig.masks.push_back(cat::DimensionMask{layer, attr.control_dims});
    sig.donor_pool = std::move(donors);
    return sig;
}

// End-to-end batch synthesis: identity draw, donor substitution, rendering.
void BM_synthesize_batch(benchmark::State& state) {
    const cat::ToyGeneratorSpec spec = bench_spec();
    const cat::ToyGenerator generator(spec);

    cat::SignatureRegistry registry;
    int seed = 1;
    for (const char* name : {"Male", "Blond_Hair"}) {
        auto [pos, neg] =
            cat::make_toy_seed_sets(spec, name, 8, 8, static_cast<std::uint64_t>(seed++));
        registry.add(exact_signature(spec, name, std::move(pos)));
        registry.add(exact_signature(spec, name, std::move(neg)));
    }

    cat::BalancePlan plan;
    plan.protected_attribute = "Male";
    const long long count = state.range(0);
    plan.cells = {
        cat::PlanCell{1, {{"Blond_Hair", 1}}, count},
        cat::PlanCell{0, {{"Blond_Hair", 0}}, count},
    };

    cat::SynthesisOptions options;
    options.rng_seed = 9;
    for (auto _ : state) {
        auto samples = cat::synthesize_batch(plan, registry, generator, options);
        benchmark::DoNotOptimize(samples);
    }
    state.SetItemsProcessed(state.iterations() * 2 * count);
}

} // namespace

BENCHMARK(BM_synthesize_batch)->Arg(64)->Arg(256);
