// Command-line surface for the attribute-translation pipeline:
//   discover    seed sets -> attribute signature
//   plan        annotations -> balance plan (+ count table)
//   synthesize  plan + signatures + generator -> labeled dataset
//   evaluate    predictions (+ training counts) -> fairness report
//   stats       annotations + predictions -> per-attribute bias study
//
// Every output is written atomically and embeds the configuration that
// produced it; reruns with identical flags produce byte-identical files.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cat/annotations.hpp"
#include "cat/discovery.hpp"
#include "cat/errors.hpp"
#include "cat/io_util.hpp"
#include "cat/metrics.hpp"
#include "cat/planner.hpp"
#include "cat/registry.hpp"
#include "cat/run_config.hpp"
#include "cat/study.hpp"
#include "cat/synthesis.hpp"

namespace {

struct GlobalFlags {
    std::uint64_t rng_seed = 0;
    std::string config_path;
    std::string out;
};

cat::RunConfig load_config(const GlobalFlags& globals) {
    if (globals.config_path.empty()) return cat::RunConfig{};
    return cat::load_run_config(globals.config_path);
}

cat::LayerRange parse_layer_range(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            const int layer = std::stoi(text);
            return {layer, layer};
        }
        return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw cat::ConfigError("bad layer range '" + text + "' (expected LO:HI)");
    }
}

/// Signature donor pools live next to the signature file.
std::string donor_pool_path(const std::string& signature_path) {
    std::string stem = signature_path;
    const auto dot = stem.rfind(".json");
    if (dot != std::string::npos && dot == stem.size() - 5) stem.resize(dot);
    return stem + ".donors.bin";
}

// --- discover ----------------------------------------------------------------

struct DiscoverArgs {
    std::string positives_path;
    std::string negatives_path;
    std::string layers_text;
    double intra = -1.0; // <0 means "use config"
    double inter = -1.0;
};

int run_discover(const GlobalFlags& globals, const DiscoverArgs& args) {
    const cat::RunConfig config = load_config(globals);
    cat::Thresholds thresholds = config.thresholds();
    if (args.intra >= 0.0) thresholds.intra = args.intra;
    if (args.inter >= 0.0) thresholds.inter = args.inter;

    const cat::SeedSet positives = cat::load_seed_set(args.positives_path);
    const cat::SeedSet negatives = cat::load_seed_set(args.negatives_path);
    const cat::LayerRange range = args.layers_text.empty()
                                      ? config.layer_band(positives.label)
                                      : parse_layer_range(args.layers_text);

    std::fprintf(stderr,
                 "discover: pos=%s neg=%s label=%s layers=%d:%d intra=%g inter=%g out=%s\n",
                 args.positives_path.c_str(), args.negatives_path.c_str(),
                 positives.label.c_str(), range.lo, range.hi, thresholds.intra,
                 thresholds.inter, globals.out.c_str());

    cat::DiscoveryDiagnostics diagnostics;
    const cat::AttributeSignature sig =
        cat::discover(positives, negatives, range, thresholds, &diagnostics);
    for (const auto& warning : diagnostics.warnings)
        std::fprintf(stderr, "discover: warning: %s\n", warning.c_str());
    for (const auto& layer : diagnostics.layers)
        std::fprintf(stderr, "discover: layer %d: |A|=%zu |B|=%zu |mask|=%zu\n", layer.layer,
                     layer.intra_size, layer.inter_size, layer.mask_size);

    cat::SignatureProvenance provenance;
    provenance.intra = thresholds.intra;
    provenance.inter = thresholds.inter;
    provenance.rng_seed = globals.rng_seed;
    provenance.positives_path = args.positives_path;
    provenance.negatives_path = args.negatives_path;
    cat::save_signature(sig, globals.out, donor_pool_path(globals.out), &provenance);
    return 0;
}

// --- plan --------------------------------------------------------------------

struct PlanArgs {
    std::string annotations_path;
    std::string protected_attribute;
    std::vector<std::string> aoi;
    std::string mode = "supplement";
    std::string counts_out;
};

int run_plan(const GlobalFlags& globals, const PlanArgs& args) {
    const cat::AnnotationTable annotations = cat::parse_annotations(args.annotations_path);

    std::fprintf(stderr, "plan: annotations=%s protected=%s aoi=%zu mode=%s seed=%llu out=%s\n",
                 args.annotations_path.c_str(), args.protected_attribute.c_str(),
                 args.aoi.size(), args.mode.c_str(),
                 static_cast<unsigned long long>(globals.rng_seed), globals.out.c_str());

    cat::BalancePlan plan;
    if (args.mode == "joint")
        plan = cat::plan_joint_supplement(annotations, args.protected_attribute, args.aoi,
                                          globals.rng_seed);
    else
        plan = cat::plan_from_annotations(annotations, args.protected_attribute, args.aoi,
                                          cat::plan_mode_from_string(args.mode),
                                          globals.rng_seed);
    cat::save_plan(plan, globals.out);

    if (!args.counts_out.empty()) {
        const cat::CountTable counts =
            cat::tabulate_counts(annotations, args.protected_attribute, args.aoi);
        cat::save_count_table(counts, args.counts_out);
    }
    return 0;
}

// --- synthesize ----------------------------------------------------------------

struct SynthesizeArgs {
    std::string plan_path;
    std::string generator_path;
    std::vector<std::string> signature_paths;
    bool paired = false;
};

int run_synthesize(const GlobalFlags& globals, const SynthesizeArgs& args) {
    const cat::BalancePlan plan = cat::load_plan(args.plan_path);
    const cat::ToyGeneratorSpec spec = cat::load_toy_spec(args.generator_path);
    const cat::ToyGenerator generator(spec);

    cat::SignatureRegistry registry;
    for (const auto& path : args.signature_paths)
        registry.add(cat::load_signature(path));

    std::fprintf(stderr,
                 "synthesize: plan=%s generator=%s signatures=%zu paired=%d seed=%llu out=%s\n",
                 args.plan_path.c_str(), args.generator_path.c_str(),
                 args.signature_paths.size(), args.paired ? 1 : 0,
                 static_cast<unsigned long long>(globals.rng_seed), globals.out.c_str());

    cat::SynthesisOptions options;
    options.rng_seed = globals.rng_seed;
    options.paired = args.paired;
    const std::vector<cat::LabeledSample> samples =
        cat::synthesize_batch(plan, registry, generator, options);
    cat::save_dataset(samples, generator.latent_config(), generator.output_dim(),
                      globals.rng_seed, globals.out);
    std::fprintf(stderr, "synthesize: wrote %zu samples\n", samples.size());
    return 0;
}

// --- evaluate --------------------------------------------------------------------

struct EvaluateArgs {
    std::string pred_path;
    std::string train_counts_path;
    std::string table_out;
};

int run_evaluate(const GlobalFlags& globals, const EvaluateArgs& args) {
    const cat::RunConfig config = load_config(globals);
    const cat::PredictionTable pred = cat::parse_predictions(args.pred_path);

    std::fprintf(stderr, "evaluate: pred=%s train-counts=%s bins=%d epsilon=%g out=%s\n",
                 args.pred_path.c_str(),
                 args.train_counts_path.empty() ? "(none)" : args.train_counts_path.c_str(),
                 config.kl_bins, config.kl_epsilon, globals.out.c_str());

    cat::CountTable train;
    const cat::CountTable* train_ptr = nullptr;
    if (!args.train_counts_path.empty()) {
        train = cat::load_count_table(args.train_counts_path);
        train_ptr = &train;
    }
    const cat::MetricsReport report = cat::evaluate_all(pred, train_ptr, config.metrics());
    cat::atomic_write(globals.out, cat::render_report_json(report));
    if (!args.table_out.empty())
        cat::atomic_write(args.table_out, cat::render_report_table(report));
    return 0;
}

// --- stats ----------------------------------------------------------------------

struct StatsArgs {
    std::string annotations_path;
    std::string pred_path;
    std::string protected_attribute;
    std::string table_out;
    std::string counts_out;
};

int run_stats(const GlobalFlags& globals, const StatsArgs& args) {
    const cat::RunConfig config = load_config(globals);
    const cat::AnnotationTable annotations = cat::parse_annotations(args.annotations_path);
    const cat::PredictionTable pred = cat::parse_predictions(args.pred_path);

    std::fprintf(stderr, "stats: annotations=%s pred=%s protected=%s out=%s\n",
                 args.annotations_path.c_str(), args.pred_path.c_str(),
                 args.protected_attribute.c_str(), globals.out.c_str());

    std::vector<cat::AttributeStudyRow> rows =
        cat::attribute_study(annotations, pred, args.protected_attribute);
    for (auto& row : rows)
        row.taxonomy = cat::classify_attribute(row.attribute, row.deo, config.masculinity,
                                               config.femininity);
    cat::atomic_write(globals.out, cat::render_study_json(rows, args.protected_attribute));
    if (!args.table_out.empty())
        cat::atomic_write(args.table_out, cat::render_study_table(rows));

    if (!args.counts_out.empty()) {
        std::vector<std::string> attributes;
        for (const auto& name : annotations.attributes)
            if (name != args.protected_attribute) attributes.push_back(name);
        const cat::CountTable counts =
            cat::tabulate_counts(annotations, args.protected_attribute, attributes);
        cat::save_count_table(counts, args.counts_out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controllable attribute translation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags globals;
    app.add_option("--rng-seed", globals.rng_seed, "Base seed for all derived RNG streams");
    app.add_option("--config", globals.config_path, "Run-config JSON file");
    app.add_option("--out", globals.out, "Primary output path");

    DiscoverArgs discover_args;
    auto* discover = app.add_subcommand("discover", "Derive an attribute signature from seed sets");
    discover->add_option("--pos", discover_args.positives_path, "Positive seed-set file")->required();
    discover->add_option("--neg", discover_args.negatives_path, "Negative seed-set file")->required();
    discover->add_option("--layers", discover_args.layers_text,
                         "Layer range LO:HI (default: registry band for the seed label)");
    discover->add_option("--intra", discover_args.intra, "Intra-class similarity threshold");
    discover->add_option("--inter", discover_args.inter, "Inter-class difference threshold");

    PlanArgs plan_args;
    auto* plan = app.add_subcommand("plan", "Compute a dataset balance plan");
    plan->add_option("--annotations", plan_args.annotations_path, "Annotation list file")->required();
    plan->add_option("--protected", plan_args.protected_attribute, "Protected attribute column")->required();
    plan->add_option("--aoi", plan_args.aoi, "Attributes of interest")->delimiter(',');
    plan->add_option("--mode", plan_args.mode, "supplement | same_size | joint")
        ->check(CLI::IsMember({"supplement", "same_size", "joint"}));
    plan->add_option("--counts-out", plan_args.counts_out, "Also write the tabulated counts");

    SynthesizeArgs synth_args;
    auto* synthesize = app.add_subcommand("synthesize", "Materialize a plan into labeled samples");
    synthesize->add_option("--plan", synth_args.plan_path, "Plan file")->required();
    synthesize->add_option("--generator", synth_args.generator_path, "Toy generator profile")->required();
    synthesize->add_option("--sig", synth_args.signature_paths, "Signature file (repeatable)")
        ->required();
    synthesize->add_flag("--paired", synth_args.paired,
                         "Share identity seeds across groups within an assignment");

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Compute the fairness metric report");
    evaluate->add_option("--pred", eval_args.pred_path, "Prediction CSV")->required();
    evaluate->add_option("--train-counts", eval_args.train_counts_path,
                         "Training count table (enables bias amplification)");
    evaluate->add_option("--table", eval_args.table_out, "Also write an aligned text table");

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("stats", "Per-attribute bias study over annotations");
    stats->add_option("--annotations", stats_args.annotations_path, "Annotation list file")->required();
    stats->add_option("--pred", stats_args.pred_path, "Prediction CSV")->required();
    stats->add_option("--protected", stats_args.protected_attribute, "Protected attribute column")->required();
    stats->add_option("--table", stats_args.table_out, "Also write an aligned text table");
    stats->add_option("--counts-out", stats_args.counts_out,
                      "Also write counts over every non-protected attribute");

    CLI11_PARSE(app, argc, argv);

    try {
        if (globals.out.empty()) throw cat::ConfigError("--out is required");
        if (discover->parsed()) return run_discover(globals, discover_args);
        if (plan->parsed()) return run_plan(globals, plan_args);
        if (synthesize->parsed()) return run_synthesize(globals, synth_args);
        if (evaluate->parsed()) return run_evaluate(globals, eval_args);
        if (stats->parsed()) return run_stats(globals, stats_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "catkit: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
