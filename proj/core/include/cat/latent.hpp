#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cat/errors.hpp"

namespace cat {

/// Shape of the layered latent space plus the run's base RNG seed.
struct LatentConfig {
    int layers = 1;         // R
    int dims_per_layer = 1; // k
    std::uint64_t rng_seed = 0;

    /// The 256x256 StyleGAN2 profile: 14 layers x 512 dims.
    static LatentConfig stylegan_256(std::uint64_t rng_seed = 0) {
        return LatentConfig{14, 512, rng_seed};
    }

    bool same_shape(const LatentConfig& other) const {
        return layers == other.layers && dims_per_layer == other.dims_per_layer;
    }

    void validate() const;
};

/// One latent code: an R x k matrix of finite reals, stored row-major.
/// Immutable by convention after construction; copies are cheap enough at
/// desk scale.
class LayeredLatent {
public:
    LayeredLatent() = default;
    LayeredLatent(int layers, int dims_per_layer)
        : layers_(layers),
          dims_(dims_per_layer),
          values_(static_cast<std::size_t>(layers) * dims_per_layer, 0.0f) {}

    static LayeredLatent zeros(const LatentConfig& cfg) {
        return LayeredLatent(cfg.layers, cfg.dims_per_layer);
    }

    int layers() const { return layers_; }
    int dims_per_layer() const { return dims_; }

    float at(int layer, int dim) const {
        return values_[static_cast<std::size_t>(layer) * dims_ + dim];
    }
    float& at(int layer, int dim) {
        return values_[static_cast<std::size_t>(layer) * dims_ + dim];
    }

    std::span<const float> layer(int r) const {
        return {values_.data() + static_cast<std::size_t>(r) * dims_,
                static_cast<std::size_t>(dims_)};
    }

    const std::vector<float>& values() const { return values_; }
    std::vector<float>& values() { return values_; }

    bool same_shape(const LayeredLatent& other) const {
        return layers_ == other.layers_ && dims_ == other.dims_;
    }
    bool same_shape(const LatentConfig& cfg) const {
        return layers_ == cfg.layers && dims_ == cfg.dims_per_layer;
    }

    bool operator==(const LayeredLatent& other) const = default;

    /// Throws ConfigError when any entry is NaN or infinite.
    void check_finite() const;

private:
    int layers_ = 0;
    int dims_ = 0;
    std::vector<float> values_;
};

enum class Polarity { positive, negative };

const char* to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);

/// A labeled set of latent codes; the unit CAT discovery consumes.
struct SeedSet {
    std::string label;
    Polarity polarity = Polarity::positive;
    std::vector<LayeredLatent> members;

    std::size_t size() const { return members.size(); }
    bool empty() const { return members.empty(); }

    /// Nonempty, all members one shape.
    void validate() const;
};

/// Inclusive range of latent layers.
struct LayerRange {
    int lo = 0;
    int hi = 0;

    int size() const { return hi - lo + 1; }
    bool contains(int layer) const { return layer >= lo && layer <= hi; }
    bool overlaps(const LayerRange& other) const {
        return lo <= other.hi && other.lo <= hi;
    }

    void validate(int total_layers) const;

    bool operator==(const LayerRange&) const = default;
};

/// n latent codes with every entry drawn i.i.d. from N(0,1), deterministic
/// given cfg.rng_seed. Returned with label "identity", positive polarity.
SeedSet sample_identity_seeds(int n, const LatentConfig& cfg);

/// Elementwise |a - b| as an R x k matrix. Shapes must match.
LayeredLatent latent_delta(const LayeredLatent& a, const LayeredLatent& b);

// --- Seed-set container files -------------------------------------------
//
// Binary: self-describing header (label, polarity, shape, count) followed by
// the members as row-major little-endian 32-bit floats. Round-trips
// bit-exactly.
//
// Text: the same fields in a line-oriented layout, one latent per record with
// layers delimited by "|". Float values are printed with enough digits to
// round-trip binary32 exactly.

void save_seed_set(const SeedSet& set, const std::string& path);
SeedSet load_seed_set(const std::string& path);

void save_seed_set_text(const SeedSet& set, const std::string& path);
SeedSet load_seed_set_text(const std::string& path);

/// Content fingerprint over shape and member bytes; stable across
/// save/load. Used by signature files to pin their donor pool.
std::uint64_t seed_set_fingerprint(const SeedSet& set);

} // namespace cat
