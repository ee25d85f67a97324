#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cat/latent.hpp"

namespace cat {

/// Similarity/difference cutoffs for signature discovery.
///
/// Defaults follow the latent-difference statistics: entries of two N(0,1)
/// codes differ by N(0, sqrt(2)), so the working range for both cutoffs is
/// [sqrt(2), 2*sqrt(2)]. Values outside that range are legal but produce a
/// warning about degenerate masks.
struct Thresholds {
    double intra;
    double inter;

    Thresholds();
    Thresholds(double intra_threshold, double inter_threshold)
        : intra(intra_threshold), inter(inter_threshold) {}

    static double recommended_lo(); // sqrt(2)
    static double recommended_hi(); // 2*sqrt(2)

    void validate() const; // finite, >= 0
    std::vector<std::string> range_warnings() const;
};

/// Sorted set of dimension indices within one layer.
struct DimensionMask {
    int layer = 0;
    std::vector<int> dims; // strictly increasing, each in [0, k)

    std::size_t size() const { return dims.size(); }
    bool empty() const { return dims.empty(); }
    bool contains(int dim) const;

    bool operator==(const DimensionMask&) const = default;
};

DimensionMask full_mask(int layer, int dims_per_layer);
DimensionMask mask_intersection(const DimensionMask& a, const DimensionMask& b);
DimensionMask mask_union(const DimensionMask& a, const DimensionMask& b);
bool mask_subset(const DimensionMask& inner, const DimensionMask& outer);

/// The executable form of an attribute: which latent cells encode it and
/// which seeds may donate values for those cells.
struct AttributeSignature {
    std::string label;
    LayerRange layer_range;
    std::vector<DimensionMask> masks; // masks[i].layer == layer_range.lo + i
    SeedSet donor_pool;

    std::size_t cell_count() const;
    const DimensionMask& mask_for_layer(int layer) const;

    void validate() const;
};

/// Per-layer sizes of the intra (A), inter (B) and combined (C) masks.
struct LayerDiagnostics {
    int layer = 0;
    std::size_t intra_size = 0;
    std::size_t inter_size = 0;
    std::size_t mask_size = 0;
};

struct DiscoveryDiagnostics {
    std::vector<LayerDiagnostics> layers;
    std::vector<std::string> warnings;
};

/// Dimensions of `layer` where |a - b| < t (strict).
DimensionMask pairwise_similar_dims(const LayeredLatent& a, const LayeredLatent& b,
                                    int layer, double t);

/// Dimensions of `layer` where |a - b| > t (strict).
DimensionMask pairwise_different_dims(const LayeredLatent& a, const LayeredLatent& b,
                                      int layer, double t);

/// Intersection of pairwise_similar_dims over all unordered distinct pairs of
/// `seeds`, starting from the full dimension set. Requires >= 2 members.
DimensionMask intra_class_similarity(const SeedSet& seeds, int layer, double t);

/// Intersection of pairwise_different_dims over all cross pairs
/// (e in positives, f in negatives), starting from the full dimension set.
/// Requires both sets nonempty.
DimensionMask inter_class_difference(const SeedSet& positives, const SeedSet& negatives,
                                     int layer, double t);

/// Runs the full signature discovery over each layer of `range`: the mask per
/// layer is the union of intra-class similarity and inter-class difference.
/// The positive set becomes the signature's donor pool. Requires >= 2
/// positives and >= 1 negative.
AttributeSignature discover(const SeedSet& positives, const SeedSet& negatives,
                            const LayerRange& range, const Thresholds& thresholds,
                            DiscoveryDiagnostics* diagnostics = nullptr);

// --- Signature files -------------------------------------------------------
//
// JSON, human-readable and diffable: label, layer range, the sorted dimension
// list per layer, and a donor-pool reference (path relative to the signature
// file, plus a content fingerprint checked on load).

struct SignatureProvenance {
    double intra = 0.0;
    double inter = 0.0;
    std::uint64_t rng_seed = 0;
    std::string positives_path;
    std::string negatives_path;
};

void save_signature(const AttributeSignature& sig, const std::string& path,
                    const std::string& donor_pool_path,
                    const SignatureProvenance* provenance = nullptr);

AttributeSignature load_signature(const std::string& path);

} // namespace cat
