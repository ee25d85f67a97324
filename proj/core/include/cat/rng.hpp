#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace cat {

/// splitmix64 finalizer; the basis for all seed derivation.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent substream seed from (seed, key) pairs.
/// mix_seed(s, a, b) != mix_seed(s, b, a) in general; argument order is part
/// of the stream identity.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key1, std::uint64_t key2);

/// String-keyed variants (key hashed with fnv1a).
std::uint64_t mix_seed(std::uint64_t seed, const std::string& key);
std::uint64_t mix_seed(std::uint64_t seed, const std::string& key, std::uint64_t index);

/// FNV-1a 64-bit hash of a byte range. Used for content fingerprints and
/// string-keyed stream derivation.
std::uint64_t fnv1a(const void* data, std::size_t size);
std::uint64_t fnv1a(const std::string& s);

/// Deterministic standard-normal sampler.
///
/// mt19937_64 plus an explicit Box-Muller transform, so sequences depend only
/// on the seed and this code, not on the standard library's distribution
/// internals.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

    /// One N(0,1) draw.
    double next();

    /// Uniform draw in [0,1).
    double uniform();

    /// Uniform integer in [0, n). n must be >= 1.
    std::uint64_t uniform_index(std::uint64_t n);

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace cat
