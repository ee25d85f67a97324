#include <cmath>
#include <iterator>
#include <string>
#include <vector>

#include <doctest.h>

#include "cat/io_util.hpp"
#include "cat/metrics.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using cat::CountTable;
using cat::MetricsConfig;
using cat::MetricsReport;
using cat::PredictionTable;
using cat::TiePolicy;

namespace {

/// Prediction table over one attribute from parallel columns.
PredictionTable one_attribute_table(const std::vector<int>& groups,
                                    const std::vector<std::uint8_t>& labels,
                                    const std::vector<double>& scores) {
    PredictionTable t;
    t.attributes = {"A"};
    for (std::size_t i = 0; i < groups.size(); ++i) {
        t.ids.push_back("s" + std::to_string(i));
        t.groups.push_back(groups[i]);
        t.labels.push_back({labels[i]});
        t.scores.push_back({scores[i]});
    }
    return t;
}

} // namespace

TEST_CASE("prediction CSV parses labels, scores and representations") {
    const std::string csv =
        "id,group,Smiling:label,Smiling:score,Male:label,Male:score,rep:0,rep:1\n"
        "a,0,1,0.9,0,0.2,1.5,-0.5\n"
        "b,1,0,0.3,1,0.8,0.0,2.25\n";
    const PredictionTable t = cat::parse_predictions_text(csv, "pred.csv");
    REQUIRE(t.row_count() == 2);
    CHECK(t.attributes == std::vector<std::string>{"Smiling", "Male"});
    CHECK(t.groups[1] == 1);
    CHECK(t.labels[0][0] == 1);
    CHECK(t.scores[1][1] == 0.8);
    CHECK(t.representation_dim() == 2);
    CHECK(t.representations[1][1] == 2.25);

    SUBCASE("round trip") {
        testsupport::TempDir tmp;
        cat::save_predictions(t, tmp.file("pred.csv"));
        const PredictionTable back = cat::parse_predictions(tmp.file("pred.csv"));
        CHECK(back.attributes == t.attributes);
        CHECK(back.ids == t.ids);
        CHECK(back.labels == t.labels);
        CHECK(back.scores == t.scores);
        CHECK(back.representations == t.representations);
    }
}

TEST_CASE("prediction CSV errors name the offending location") {
    CHECK_THROWS_WITH_AS(cat::parse_predictions_text("group,id\n", "p.csv"),
                         doctest::Contains("id,group"), cat::ParseError);
    CHECK_THROWS_WITH_AS(
        cat::parse_predictions_text("id,group,A:label\n", "p.csv"),
        doctest::Contains("A:score"), cat::ParseError);
    CHECK_THROWS_WITH_AS(
        cat::parse_predictions_text("id,group,A:label,A:score\na,0,1\n", "p.csv"),
        doctest::Contains("p.csv:2"), cat::ParseError);
    CHECK_THROWS_WITH_AS(
        cat::parse_predictions_text("id,group,A:label,A:score\na,0,1,1.5\n", "p.csv"),
        doctest::Contains("[0, 1]"), cat::ParseError);
    CHECK_THROWS_WITH_AS(
        cat::parse_predictions_text("id,group,A:label,A:score,rep:1\n", "p.csv"),
        doctest::Contains("rep:0"), cat::ParseError);
}

TEST_CASE("average precision matches hand-enumerated small cases") {
    using ranks = std::vector<std::size_t>;

    // Mean precision at the positive ranks, worked out by hand.
    struct Case {
        ranks positive_ranks;
        std::size_t n;
        double expected;
    };
    const Case cases[] = {
        {{1}, 1, 1.0},
        {{1, 2, 3}, 3, 1.0},               // all positives first
        {{3}, 3, 1.0 / 3.0},               // single positive last
        {{1, 3}, 4, (1.0 + 2.0 / 3.0) / 2.0},
        {{2, 4}, 5, (0.5 + 0.5) / 2.0},
        {{2, 3, 6}, 6, (0.5 + 2.0 / 3.0 + 0.5) / 3.0},
        {{4, 5, 6}, 6, (0.25 + 0.4 + 0.5) / 3.0},
    };
    for (const auto& c : cases) {
        const auto [scores, labels] = oracle::scores_with_positive_ranks(c.n, c.positive_ranks);
        CHECK(cat::average_precision(scores, labels) ==
              doctest::Approx(c.expected).epsilon(1e-15));
        CHECK(oracle::ap_of_positive_ranks(c.positive_ranks) ==
              doctest::Approx(c.expected).epsilon(1e-15));
    }

    CHECK_THROWS_AS(cat::average_precision({0.5, 0.2}, {0, 0}), cat::UndefinedMetricError);
    CHECK_THROWS_AS(cat::average_precision({0.5}, {0, 1}), cat::ConfigError);
}

TEST_CASE("tie policy: stable keeps input order, pessimistic ranks negatives first") {
    const std::vector<double> scores{0.5, 0.5};
    const std::vector<std::uint8_t> labels{1, 0};
    CHECK(cat::average_precision(scores, labels, TiePolicy::stable) == 1.0);
    CHECK(cat::average_precision(scores, labels, TiePolicy::pessimistic) == 0.5);

    // Ties have no effect when scoring separates the classes.
    const std::vector<double> clean{0.9, 0.1};
    CHECK(cat::average_precision(clean, labels, TiePolicy::stable) ==
          cat::average_precision(clean, labels, TiePolicy::pessimistic));
}

TEST_CASE("DEO reproduces the published attribute-study gaps") {
    // Group APs quoted in percent; DEO in percentage points.
    CHECK(cat::deo_from_group_aps(0.926, 0.587) == doctest::Approx(33.9).epsilon(0.002));
    CHECK(cat::deo_from_group_aps(0.863, 0.928) == doctest::Approx(6.5).epsilon(0.002));
    CHECK(cat::deo_from_group_aps(0.773, 0.702) == doctest::Approx(7.1).epsilon(0.005));

    // The same gaps arise from concrete rankings.
    const auto ap = [](std::size_t n, const std::vector<std::size_t>& where) {
        const auto [scores, labels] = oracle::scores_with_positive_ranks(n, where);
        return cat::average_precision(scores, labels);
    };
    CHECK(cat::deo_from_group_aps(ap(5, {2, 5}), ap(9, {9})) ==
          doctest::Approx(33.9).epsilon(0.002));
    CHECK(cat::deo_from_group_aps(ap(8, {8}), ap(13, {13})) ==
          doctest::Approx(4.8).epsilon(0.01));
    CHECK(cat::deo_from_group_aps(ap(13, {7, 13}), ap(12, {12})) ==
          doctest::Approx(6.5).epsilon(0.01));
    CHECK(cat::deo_from_group_aps(ap(7, {7}), ap(14, {14})) ==
          doctest::Approx(7.1).epsilon(0.01));
}

TEST_CASE("per-attribute DEO needs positives in both groups") {
    const PredictionTable t = one_attribute_table({0, 0, 1, 1}, {1, 0, 1, 0},
                                                  {0.9, 0.4, 0.7, 0.8});
    // Group 0 ranking: (0.9,1)(0.4,0) -> AP 1; group 1: (0.8,0)(0.7,1) -> AP 0.5.
    CHECK(cat::deo(t, "A") == doctest::Approx(50.0));

    const PredictionTable missing = one_attribute_table({0, 1}, {1, 0}, {0.9, 0.4});
    CHECK_THROWS_AS(cat::deo(missing, "A"), cat::UndefinedMetricError);
}

TEST_CASE("bias amplification compares predicted and training majority shares") {
    CountTable train;
    train.protected_attribute = "Male";
    train.group_totals = {60, 60};
    train.rows.push_back({"A", {30, 10}, {30, 50}});

    // Predicted positive (score > 0.5): 4 in group 0, 1 in group 1.
    const PredictionTable pred = one_attribute_table(
        {0, 0, 0, 0, 1, 1, 0}, {1, 1, 0, 1, 1, 0, 0},
        {0.9, 0.8, 0.7, 0.6, 0.9, 0.2, 0.5});
    // Training majority among positives is group 0 (30 of 40 = 75%);
    // predicted share is 4 of 5 = 80%: amplification +5 points.
    CHECK(cat::bias_amplification(train, pred, "A") == doctest::Approx(5.0).epsilon(1e-12));

    // The threshold is strict: a score of exactly 0.5 is not a positive call.
    CHECK(cat::bias_amplification(train, pred, "A", 0.89) ==
          doctest::Approx((1.0 / 2.0 - 0.75) * 100.0).epsilon(1e-12));

    CountTable tied = train;
    tied.rows[0].positives = {20, 20};
    CHECK_THROWS_AS(cat::bias_amplification(tied, pred, "A"), cat::TieError);
    CHECK_THROWS_AS(cat::bias_amplification(train, pred, "A", 1.0),
                    cat::UndefinedMetricError);
}

TEST_CASE("KL divergence matches the smoothed closed form") {
    // Label 1: group 1 scores land in bin 9, group 0 split over bins 0 and 9.
    // Label 0: both groups identical (bin 0), contributing exactly zero.
    PredictionTable t;
    t.attributes = {"A"};
    const struct {
        int group;
        std::uint8_t label;
        double score;
    } rows[] = {
        {1, 1, 0.95}, {1, 1, 0.97}, {1, 1, 0.99},
        {0, 1, 0.01}, {0, 1, 0.96},
        {1, 0, 0.02}, {0, 0, 0.03},
    };
    for (std::size_t i = 0; i < std::size(rows); ++i) {
        t.ids.push_back("r" + std::to_string(i));
        t.groups.push_back(rows[i].group);
        t.labels.push_back({rows[i].label});
        t.scores.push_back({rows[i].score});
    }

    const double eps = 1e-6;
    std::vector<long long> g1(10, 0), g0(10, 0);
    g1[9] = 3;
    g0[0] = 1;
    g0[9] = 1;
    const double expected_y1 = oracle::smoothed_kl(g1, g0, eps);
    std::vector<long long> zero1(10, 0), zero0(10, 0);
    zero1[0] = 1;
    zero0[0] = 1;
    const double expected_y0 = oracle::smoothed_kl(zero1, zero0, eps);
    CHECK(expected_y0 == doctest::Approx(0.0).epsilon(1e-15));

    CHECK(cat::kl_score_divergence(t, "A", 10, eps) ==
          doctest::Approx(0.5 * (expected_y1 + expected_y0)).epsilon(1e-12));

    // Identical conditional distributions give (numerically) zero divergence.
    PredictionTable same = one_attribute_table({0, 1, 0, 1}, {1, 1, 0, 0},
                                               {0.8, 0.8, 0.1, 0.1});
    CHECK(cat::kl_score_divergence(same, "A") == doctest::Approx(0.0).epsilon(1e-12));

    // A group with no samples for one label leaves the metric undefined.
    PredictionTable missing = one_attribute_table({0, 0, 1}, {1, 0, 0},
                                                  {0.9, 0.1, 0.2});
    CHECK_THROWS_AS(cat::kl_score_divergence(missing, "A"), cat::UndefinedMetricError);
}

TEST_CASE("distance correlation agrees with the raw-moment oracle") {
    for (std::uint64_t trial = 0; trial < 12; ++trial) {
        // Deterministic pseudo-random instance.
        std::uint64_t state = 77 + trial;
        auto unit = [&state]() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            return static_cast<double>(state >> 11) / 9007199254740992.0;
        };
        const std::size_t n = 8 + trial;
        const std::size_t d = 1 + trial % 4;
        std::vector<std::vector<double>> X(n, std::vector<double>(d));
        std::vector<int> z(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) X[i][j] = 2.0 * unit() - 1.0;
            z[i] = unit() < 0.5 ? 0 : 1;
        }
        z[0] = 0;
        z[n - 1] = 1; // keep both groups present

        const double got = cat::distance_correlation_sq(X, z);
        const double want = oracle::dcor_sq(X, z);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
    }
}

TEST_CASE("distance correlation hits its dependence extremes") {
    // Representation fully determined by the group: dcor^2 = 1.
    std::vector<std::vector<double>> X;
    std::vector<int> z;
    for (int i = 0; i < 10; ++i) {
        z.push_back(i % 2);
        X.push_back({static_cast<double>(i % 2) * 3.0, -(i % 2) * 1.0});
    }
    CHECK(cat::distance_correlation_sq(X, z) == doctest::Approx(1.0).epsilon(1e-12));

    // Degenerate variance on either side collapses to zero.
    CHECK(cat::distance_correlation_sq(X, std::vector<int>(10, 1)) == 0.0);
    std::vector<std::vector<double>> flat(10, {2.0, 2.0});
    CHECK(cat::distance_correlation_sq(flat, z) == 0.0);
}

TEST_CASE("evaluate_all assembles cells, notes and means") {
    PredictionTable t;
    t.attributes = {"Good", "NoPos"};
    const int groups[] = {0, 0, 1, 1};
    const std::uint8_t good[] = {1, 0, 1, 0};
    const double scores[] = {0.9, 0.2, 0.8, 0.3};
    for (std::size_t i = 0; i < 4; ++i) {
        t.ids.push_back("x" + std::to_string(i));
        t.groups.push_back(groups[i]);
        t.labels.push_back({good[i], 0}); // second attribute never positive
        t.scores.push_back({scores[i], 0.4});
        t.representations.push_back({scores[i], 1.0 - scores[i]});
    }

    CountTable train;
    train.protected_attribute = "Z";
    train.group_totals = {4, 4};
    train.rows.push_back({"Good", {2, 1}, {2, 3}});

    const MetricsReport report = cat::evaluate_all(t, &train);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.row("Good").ap_overall.defined);
    CHECK(report.row("Good").ap_overall.value == doctest::Approx(100.0));
    CHECK(report.row("Good").deo.defined);
    CHECK(report.row("Good").deo.value == doctest::Approx(0.0));
    CHECK(report.row("Good").ba.defined);
    CHECK_FALSE(report.row("NoPos").ap_overall.defined);
    CHECK_FALSE(report.row("NoPos").deo.defined);
    CHECK(report.row("NoPos").deo.note.find("no positives") != std::string::npos);
    // No training row for NoPos: BA undefined with a different note.
    CHECK_FALSE(report.row("NoPos").ba.defined);
    CHECK(report.dcor2.defined);

    // Means skip undefined cells instead of poisoning the aggregate.
    CHECK(report.mean_ap.defined);
    CHECK(report.mean_ap.value == doctest::Approx(100.0));

    const MetricsReport no_train = cat::evaluate_all(t, nullptr);
    CHECK_FALSE(no_train.row("Good").ba.defined);
    CHECK_FALSE(no_train.mean_ba.defined);
}

TEST_CASE("report renderings show dashes and survive the file round trip") {
    PredictionTable t = one_attribute_table({0, 0, 1, 1}, {1, 0, 0, 0},
                                            {0.9, 0.1, 0.5, 0.4});
    const MetricsReport report = cat::evaluate_all(t, nullptr);

    const std::string table = cat::render_report_table(report);
    CHECK(table.find("attribute") != std::string::npos);
    CHECK(table.find("-") != std::string::npos); // undefined cells render as dashes
    CHECK(table.find("dcor2: -") != std::string::npos);

    const std::string js = cat::render_report_json(report);
    CHECK(js.find("\"formula_version\": \"metrics-v1\"") != std::string::npos);
    CHECK(js.find("\"defined\": false") != std::string::npos);

    testsupport::TempDir tmp;
    cat::save_report(report, tmp.file("report.json"), tmp.file("report.txt"));
    CHECK(cat::read_file(tmp.file("report.json")) == js);
    CHECK(cat::read_file(tmp.file("report.txt")) == table);
}
