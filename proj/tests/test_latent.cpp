#include <cmath>
#include <limits>

#include <doctest.h>

#include "cat/latent.hpp"
#include "support/tempdir.hpp"

using cat::LatentConfig;
using cat::LayeredLatent;
using cat::LayerRange;
using cat::SeedSet;

TEST_CASE("LatentConfig validation rejects non-positive shapes") {
    CHECK_NOTHROW(LatentConfig{1, 1, 0}.validate());
    CHECK_THROWS_AS((LatentConfig{0, 4, 0}.validate()), cat::ConfigError);
    CHECK_THROWS_AS((LatentConfig{4, 0, 0}.validate()), cat::ConfigError);
    const LatentConfig sg = LatentConfig::stylegan_256();
    CHECK(sg.layers == 14);
    CHECK(sg.dims_per_layer == 512);
}

TEST_CASE("LayeredLatent indexing and layer spans agree") {
    LayeredLatent z(3, 4);
    z.at(1, 2) = 5.0f;
    z.at(2, 3) = -1.0f;
    CHECK(z.layer(1)[2] == 5.0f);
    CHECK(z.layer(2)[3] == -1.0f);
    CHECK(z.values().size() == 12);
    CHECK(z.same_shape(LatentConfig{3, 4, 99}));
    CHECK_FALSE(z.same_shape(LatentConfig{4, 3, 0}));
}

TEST_CASE("check_finite rejects NaN and infinity") {
    LayeredLatent z(2, 2);
    CHECK_NOTHROW(z.check_finite());
    z.at(0, 1) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(z.check_finite(), cat::ConfigError);
    z.at(0, 1) = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(z.check_finite(), cat::ConfigError);
}

TEST_CASE("LayerRange geometry") {
    const LayerRange r{2, 5};
    CHECK(r.size() == 4);
    CHECK(r.contains(2));
    CHECK(r.contains(5));
    CHECK_FALSE(r.contains(6));
    CHECK(r.overlaps(LayerRange{5, 9}));
    CHECK_FALSE(r.overlaps(LayerRange{6, 9}));
    CHECK_NOTHROW(r.validate(6));
    CHECK_THROWS_AS(r.validate(5), cat::IndexError);
    CHECK_THROWS_AS((LayerRange{3, 2}.validate(6)), cat::IndexError);
    CHECK_THROWS_AS((LayerRange{-1, 2}.validate(6)), cat::IndexError);
}

TEST_CASE("sample_identity_seeds is deterministic and roughly N(0,1)") {
    const LatentConfig cfg{6, 32, 2024};
    const SeedSet a = cat::sample_identity_seeds(8, cfg);
    const SeedSet b = cat::sample_identity_seeds(8, cfg);
    REQUIRE(a.size() == 8);
    CHECK(a.label == "identity");
    CHECK(a.polarity == cat::Polarity::positive);
    for (std::size_t i = 0; i < 8; ++i) CHECK(a.members[i] == b.members[i]);

    const SeedSet c = cat::sample_identity_seeds(8, LatentConfig{6, 32, 2025});
    CHECK_FALSE(a.members[0] == c.members[0]);

    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& m : a.members)
        for (const float v : m.values()) {
            sum += v;
            sum_sq += static_cast<double>(v) * v;
            ++n;
        }
    const double mean = sum / static_cast<double>(n);
    CHECK(std::abs(mean) < 0.1);
    CHECK(std::abs(sum_sq / static_cast<double>(n) - 1.0) < 0.1);

    CHECK_THROWS_AS(cat::sample_identity_seeds(0, cfg), cat::EmptyRequestError);
}

TEST_CASE("latent_delta is the elementwise absolute difference") {
    LayeredLatent a(2, 2), b(2, 2);
    a.at(0, 0) = 1.0f;
    b.at(0, 0) = -2.0f;
    b.at(1, 1) = 4.0f;
    const LayeredLatent d = cat::latent_delta(a, b);
    CHECK(d.at(0, 0) == 3.0f);
    CHECK(d.at(1, 1) == 4.0f);
    CHECK(d.at(0, 1) == 0.0f);
    CHECK_THROWS_AS(cat::latent_delta(a, LayeredLatent(2, 3)), cat::ConfigError);
}

TEST_CASE("seed sets round-trip bit-exactly through both file formats") {
    const LatentConfig cfg{3, 5, 77};
    SeedSet set = cat::sample_identity_seeds(4, cfg);
    set.label = "Wavy_Hair";
    set.polarity = cat::Polarity::negative;
    // Exercise values that print awkwardly.
    set.members[0].at(0, 0) = 0.1f;
    set.members[0].at(1, 1) = -3.4028235e38f;
    set.members[0].at(2, 2) = 1.1754944e-38f;

    testsupport::TempDir tmp;
    SUBCASE("binary") {
        cat::save_seed_set(set, tmp.file("seeds.bin"));
        const SeedSet back = cat::load_seed_set(tmp.file("seeds.bin"));
        CHECK(back.label == set.label);
        CHECK(back.polarity == set.polarity);
        REQUIRE(back.size() == set.size());
        for (std::size_t i = 0; i < set.size(); ++i) CHECK(back.members[i] == set.members[i]);
    }
    SUBCASE("text") {
        cat::save_seed_set_text(set, tmp.file("seeds.txt"));
        const SeedSet back = cat::load_seed_set_text(tmp.file("seeds.txt"));
        CHECK(back.label == set.label);
        CHECK(back.polarity == set.polarity);
        REQUIRE(back.size() == set.size());
        for (std::size_t i = 0; i < set.size(); ++i) CHECK(back.members[i] == set.members[i]);
    }
}

TEST_CASE("seed-set fingerprints pin content, not representation") {
    const LatentConfig cfg{2, 3, 5};
    SeedSet set = cat::sample_identity_seeds(3, cfg);
    const std::uint64_t fp = cat::seed_set_fingerprint(set);

    testsupport::TempDir tmp;
    cat::save_seed_set(set, tmp.file("seeds.bin"));
    CHECK(cat::seed_set_fingerprint(cat::load_seed_set(tmp.file("seeds.bin"))) == fp);

    set.members[1].at(0, 0) += 1.0f;
    CHECK(cat::seed_set_fingerprint(set) != fp);
}

TEST_CASE("seed-set validation wants a nonempty, shape-consistent set") {
    SeedSet empty{"x", cat::Polarity::positive, {}};
    CHECK_THROWS_AS(empty.validate(), cat::InsufficientSeedsError);
    SeedSet ragged{"x", cat::Polarity::positive, {LayeredLatent(2, 2), LayeredLatent(2, 3)}};
    CHECK_THROWS_AS(ragged.validate(), cat::ConfigError);
}
