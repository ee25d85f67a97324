#include "cat/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cat {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
    return mix64(mix64(seed) ^ key);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key1, std::uint64_t key2) {
    return mix64(mix_seed(seed, key1) ^ key2);
}

std::uint64_t fnv1a(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& s) {
    return fnv1a(s.data(), s.size());
}

std::uint64_t mix_seed(std::uint64_t seed, const std::string& key) {
    return mix_seed(seed, fnv1a(key));
}

std::uint64_t mix_seed(std::uint64_t seed, const std::string& key, std::uint64_t index) {
    return mix_seed(seed, fnv1a(key), index);
}

double NormalSampler::uniform() {
    // 53 random bits mapped onto [0,1).
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

std::uint64_t NormalSampler::uniform_index(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_index needs n >= 1");
    }
    // Rejection sampling over the largest multiple of n, so every index is
    // exactly equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = gen_();
    while (x >= limit) {
        x = gen_();
    }
    return x % n;
}

double NormalSampler::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // Box-Muller; u1 shifted into (0,1] so log() stays finite.
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

} // namespace cat
