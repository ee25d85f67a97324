#include "cat/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cat/errors.hpp"
#include "cat/io_util.hpp"

namespace cat {

namespace fs = std::filesystem;
using nlohmann::json;

// --- Thresholds -------------------------------------------------------------

Thresholds::Thresholds() : intra(2.0 * std::sqrt(2.0)), inter(std::sqrt(2.0)) {}

double Thresholds::recommended_lo() { return std::sqrt(2.0); }
double Thresholds::recommended_hi() { return 2.0 * std::sqrt(2.0); }

void Thresholds::validate() const {
    if (!std::isfinite(intra) || !std::isfinite(inter))
        throw ConfigError("thresholds must be finite");
    if (intra < 0.0 || inter < 0.0)
        throw ConfigError("thresholds must be non-negative");
}

std::vector<std::string> Thresholds::range_warnings() const {
    std::vector<std::string> out;
    auto check = [&out](const char* name, double v) {
        if (v < recommended_lo() || v > recommended_hi()) {
            std::ostringstream msg;
            msg << name << " threshold " << v << " outside recommended range ["
                << recommended_lo() << ", " << recommended_hi() << "]";
            out.push_back(msg.str());
        }
    };
    check("intra", intra);
    check("inter", inter);
    return out;
}

// --- DimensionMask ----------------------------------------------------------

bool DimensionMask::contains(int dim) const {
    return std::binary_search(dims.begin(), dims.end(), dim);
}

DimensionMask full_mask(int layer, int dims_per_layer) {
    if (dims_per_layer < 0)
        throw ConfigError("dims_per_layer must be non-negative");
    DimensionMask m;
    m.layer = layer;
    m.dims.resize(static_cast<std::size_t>(dims_per_layer));
    std::iota(m.dims.begin(), m.dims.end(), 0);
    return m;
}

DimensionMask mask_intersection(const DimensionMask& a, const DimensionMask& b) {
    if (a.layer != b.layer)
        throw IndexError("mask intersection across different layers");
    DimensionMask out;
    out.layer = a.layer;
    std::set_intersection(a.dims.begin(), a.dims.end(), b.dims.begin(), b.dims.end(),
                          std::back_inserter(out.dims));
    return out;
}

DimensionMask mask_union(const DimensionMask& a, const DimensionMask& b) {
    if (a.layer != b.layer)
        throw IndexError("mask union across different layers");
    DimensionMask out;
    out.layer = a.layer;
    std::set_union(a.dims.begin(), a.dims.end(), b.dims.begin(), b.dims.end(),
                   std::back_inserter(out.dims));
    return out;
}

bool mask_subset(const DimensionMask& inner, const DimensionMask& outer) {
    if (inner.layer != outer.layer)
        throw IndexError("mask subset check across different layers");
    return std::includes(outer.dims.begin(), outer.dims.end(),
                         inner.dims.begin(), inner.dims.end());
}

// --- AttributeSignature -----------------------------------------------------

std::size_t AttributeSignature::cell_count() const {
    std::size_t total = 0;
    for (const auto& m : masks) total += m.size();
    return total;
}

const DimensionMask& AttributeSignature::mask_for_layer(int layer) const {
    if (layer < layer_range.lo || layer > layer_range.hi)
        throw IndexError("layer " + std::to_string(layer) + " outside signature range [" +
                         std::to_string(layer_range.lo) + ", " +
                         std::to_string(layer_range.hi) + "]");
    return masks[static_cast<std::size_t>(layer - layer_range.lo)];
}

void AttributeSignature::validate() const {
    if (label.empty())
        throw ConfigError("signature label must not be empty");
    layer_range.validate(donor_pool.empty() ? layer_range.hi + 1
                                            : donor_pool.members.front().layers());
    if (masks.size() != static_cast<std::size_t>(layer_range.size()))
        throw ConfigError("signature has " + std::to_string(masks.size()) +
                          " masks but layer range covers " +
                          std::to_string(layer_range.size()) + " layers");
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const auto& m = masks[i];
        if (m.layer != layer_range.lo + static_cast<int>(i))
            throw ConfigError("signature mask order does not match layer range");
        if (!std::is_sorted(m.dims.begin(), m.dims.end()) ||
            std::adjacent_find(m.dims.begin(), m.dims.end()) != m.dims.end())
            throw ConfigError("signature mask dims must be strictly increasing");
        if (!m.dims.empty() && m.dims.front() < 0)
            throw IndexError("signature mask dim below zero");
        if (!donor_pool.empty()) {
            const int k = donor_pool.members.front().dims_per_layer();
            if (!m.dims.empty() && m.dims.back() >= k)
                throw IndexError("signature mask dim " + std::to_string(m.dims.back()) +
                                 " out of range for " + std::to_string(k) + " dims per layer");
        }
    }
    if (!donor_pool.empty()) donor_pool.validate();
}

// --- Mask discovery ---------------------------------------------------------

DimensionMask pairwise_similar_dims(const LayeredLatent& a, const LayeredLatent& b,
                                    int layer, double t) {
    if (!a.same_shape(b))
        throw ConfigError("latent shape mismatch in pairwise comparison");
    const auto ra = a.layer(layer);
    const auto rb = b.layer(layer);
    DimensionMask out;
    out.layer = layer;
    for (std::size_t d = 0; d < ra.size(); ++d) {
        const double diff = std::abs(static_cast<double>(ra[d]) - static_cast<double>(rb[d]));
        if (diff < t) out.dims.push_back(static_cast<int>(d));
    }
    return out;
}

DimensionMask pairwise_different_dims(const LayeredLatent& a, const LayeredLatent& b,
                                      int layer, double t) {
    if (!a.same_shape(b))
        throw ConfigError("latent shape mismatch in pairwise comparison");
    const auto ra = a.layer(layer);
    const auto rb = b.layer(layer);
    DimensionMask out;
    out.layer = layer;
    for (std::size_t d = 0; d < ra.size(); ++d) {
        const double diff = std::abs(static_cast<double>(ra[d]) - static_cast<double>(rb[d]));
        if (diff > t) out.dims.push_back(static_cast<int>(d));
    }
    return out;
}

DimensionMask intra_class_similarity(const SeedSet& seeds, int layer, double t) {
    if (seeds.size() < 2)
        throw InsufficientSeedsError("intra-class similarity needs at least 2 seeds, got " +
                                     std::to_string(seeds.size()));
    seeds.validate();
    DimensionMask acc = full_mask(layer, seeds.members.front().dims_per_layer());
    for (std::size_t i = 0; i < seeds.members.size(); ++i) {
        for (std::size_t j = i + 1; j < seeds.members.size(); ++j) {
            acc = mask_intersection(
                acc, pairwise_similar_dims(seeds.members[i], seeds.members[j], layer, t));
            if (acc.empty()) return acc;
        }
    }
    return acc;
}

DimensionMask inter_class_difference(const SeedSet& positives, const SeedSet& negatives,
                                     int layer, double t) {
    if (positives.empty() || negatives.empty())
        throw InsufficientSeedsError("inter-class difference needs nonempty seed sets");
    positives.validate();
    negatives.validate();
    if (!positives.members.front().same_shape(negatives.members.front()))
        throw ConfigError("latent shape mismatch between seed sets");
    DimensionMask acc = full_mask(layer, positives.members.front().dims_per_layer());
    for (const auto& e : positives.members) {
        for (const auto& f : negatives.members) {
            acc = mask_intersection(acc, pairwise_different_dims(e, f, layer, t));
            if (acc.empty()) return acc;
        }
    }
    return acc;
}

AttributeSignature discover(const SeedSet& positives, const SeedSet& negatives,
                            const LayerRange& range, const Thresholds& thresholds,
                            DiscoveryDiagnostics* diagnostics) {
    thresholds.validate();
    if (positives.size() < 2)
        throw InsufficientSeedsError("discovery needs at least 2 positive seeds, got " +
                                     std::to_string(positives.size()));
    if (negatives.empty())
        throw InsufficientSeedsError("discovery needs at least 1 negative seed");
    positives.validate();
    negatives.validate();
    if (!positives.members.front().same_shape(negatives.members.front()))
        throw ConfigError("latent shape mismatch between seed sets");
    range.validate(positives.members.front().layers());

    DiscoveryDiagnostics local;
    DiscoveryDiagnostics& diag = diagnostics ? *diagnostics : local;
    diag.layers.clear();
    diag.warnings = thresholds.range_warnings();

    AttributeSignature sig;
    sig.label = positives.label;
    sig.layer_range = range;
    sig.donor_pool = positives;

    for (int layer = range.lo; layer <= range.hi; ++layer) {
        const DimensionMask a = intra_class_similarity(positives, layer, thresholds.intra);
        const DimensionMask b = inter_class_difference(positives, negatives, layer, thresholds.inter);
        const DimensionMask c = mask_union(a, b);
        diag.layers.push_back({layer, a.size(), b.size(), c.size()});
        if (c.empty())
            diag.warnings.push_back("layer " + std::to_string(layer) +
                                    ": empty mask (no similar or separating dimensions)");
        sig.masks.push_back(c);
    }
    return sig;
}

// --- Signature files --------------------------------------------------------

namespace {

constexpr const char* kSignatureFormat = "catkit-signature";
constexpr int kSignatureVersion = 1;

} // namespace

void save_signature(const AttributeSignature& sig, const std::string& path,
                    const std::string& donor_pool_path,
                    const SignatureProvenance* provenance) {
    sig.validate();
    if (sig.donor_pool.empty())
        throw ConfigError("cannot save signature without a donor pool");

    save_seed_set(sig.donor_pool, donor_pool_path);

    const fs::path sig_dir = fs::path(path).parent_path();
    const fs::path donor_abs = fs::absolute(donor_pool_path);
    std::string donor_rel =
        fs::relative(donor_abs, sig_dir.empty() ? fs::current_path() : fs::absolute(sig_dir))
            .generic_string();

    json j;
    j["format"] = kSignatureFormat;
    j["version"] = kSignatureVersion;
    j["label"] = sig.label;
    j["layer_range"] = {{"lo", sig.layer_range.lo}, {"hi", sig.layer_range.hi}};
    json layers = json::array();
    for (const auto& m : sig.masks)
        layers.push_back({{"layer", m.layer}, {"dims", m.dims}});
    j["masks"] = layers;
    j["donor_pool"] = {
        {"path", donor_rel},
        {"fingerprint", seed_set_fingerprint(sig.donor_pool)},
        {"count", sig.donor_pool.size()},
    };
    if (provenance) {
        j["provenance"] = {
            {"intra_threshold", provenance->intra},
            {"inter_threshold", provenance->inter},
            {"rng_seed", provenance->rng_seed},
            {"positives", provenance->positives_path},
            {"negatives", provenance->negatives_path},
        };
    }
    atomic_write(path, j.dump(2) + "\n");
}

AttributeSignature load_signature(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kSignatureFormat)
            throw ParseError(path + ": not a signature file");
        if (j.at("version").get<int>() != kSignatureVersion)
            throw ParseError(path + ": unsupported signature version");

        AttributeSignature sig;
        sig.label = j.at("label").get<std::string>();
        sig.layer_range.lo = j.at("layer_range").at("lo").get<int>();
        sig.layer_range.hi = j.at("layer_range").at("hi").get<int>();
        for (const auto& entry : j.at("masks")) {
            DimensionMask m;
            m.layer = entry.at("layer").get<int>();
            m.dims = entry.at("dims").get<std::vector<int>>();
            sig.masks.push_back(std::move(m));
        }

        const auto& donor = j.at("donor_pool");
        fs::path donor_path = donor.at("path").get<std::string>();
        if (donor_path.is_relative()) {
            const fs::path base = fs::path(path).parent_path();
            donor_path = base.empty() ? donor_path : base / donor_path;
        }
        sig.donor_pool = load_seed_set(donor_path.string());
        const auto expected = donor.at("fingerprint").get<std::uint64_t>();
        const auto actual = seed_set_fingerprint(sig.donor_pool);
        if (expected != actual) {
            std::ostringstream msg;
            msg << path << ": donor pool fingerprint mismatch (file "
                << donor_path.string() << " changed since the signature was written)";
            throw ParseError(msg.str());
        }
        sig.validate();
        return sig;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace cat
