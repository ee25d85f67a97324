#include <string>
#include <vector>

#include <doctest.h>

#include "cat/metrics.hpp"
#include "cat/registry.hpp"
#include "cat/study.hpp"

using cat::AnnotationTable;
using cat::AttributeStudyRow;
using cat::MetricCell;
using cat::PredictionTable;
using cat::Taxonomy;

namespace {

AnnotationTable study_annotations() {
    return cat::parse_annotations_text(
        "Male Smiling Bald\n"
        "a 0 1 0\n"
        "b 0 1 0\n"
        "c 0 0 0\n"
        "d 1 1 1\n"
        "e 1 0 0\n",
        "inline");
}

PredictionTable study_predictions() {
    return cat::parse_predictions_text(
        "id,group,Smiling:label,Smiling:score,Bald:label,Bald:score\n"
        "a,0,1,0.9,0,0.1\n"
        "b,0,1,0.8,0,0.2\n"
        "c,0,0,0.3,0,0.15\n"
        "d,1,1,0.7,1,0.9\n"
        "e,1,0,0.6,0,0.25\n",
        "inline");
}

} // namespace

TEST_CASE("attribute_study aligns annotations with predictions by id") {
    const auto rows = cat::attribute_study(study_annotations(), study_predictions(), "Male");
    REQUIRE(rows.size() == 2); // Smiling and Bald; the protected column is skipped

    const AttributeStudyRow& smiling = rows[0].attribute == "Smiling" ? rows[0] : rows[1];
    CHECK(smiling.attribute == "Smiling");
    // Group 0 = {a,b,c}: positive rate 2/3; group 1 = {d,e}: 1/2.
    CHECK(smiling.positive_rate_group0 == doctest::Approx(100.0 * 2 / 3));
    CHECK(smiling.positive_rate_group1 == doctest::Approx(50.0));
    CHECK(smiling.positive_rate_overall == doctest::Approx(60.0));
    // Scores rank every positive above every negative in both groups.
    CHECK(smiling.ap_group0.value == doctest::Approx(100.0));
    CHECK(smiling.ap_group1.value == doctest::Approx(100.0));
    CHECK(smiling.deo.value == doctest::Approx(0.0));
    CHECK(smiling.taxonomy == Taxonomy::unbiased);

    const AttributeStudyRow& bald = rows[0].attribute == "Bald" ? rows[0] : rows[1];
    // No positives in group 0: AP(g0) and DEO are undefined ...
    CHECK_FALSE(bald.ap_group0.defined);
    CHECK(bald.ap_group1.defined);
    CHECK_FALSE(bald.deo.defined);
    // ... but the attribute is on the masculinity list regardless of DEO.
    CHECK(bald.taxonomy == Taxonomy::masculinity);
}

TEST_CASE("attribute_study rejects missing ids and group mismatches") {
    const AnnotationTable ann = study_annotations();
    PredictionTable pred = study_predictions();

    pred.ids[4] = "zz";
    CHECK_THROWS_AS(cat::attribute_study(ann, pred, "Male"), cat::ConfigError);

    pred = study_predictions();
    pred.groups[0] = 1; // annotation says Male=0 for 'a'
    CHECK_THROWS_AS(cat::attribute_study(ann, pred, "Male"), cat::ConflictError);

    PredictionTable none = study_predictions();
    none.attributes = {"Absent", "AlsoAbsent"};
    CHECK_THROWS_AS(cat::attribute_study(ann, none, "Male"), cat::ConfigError);
}

TEST_CASE("taxonomy: explicit lists win, then the DEO cutoff decides") {
    const auto cell = MetricCell::of(50.0);
    CHECK(cat::classify_attribute("Bald", cell) == Taxonomy::masculinity);
    CHECK(cat::classify_attribute("Heavy_Makeup", cell) == Taxonomy::femininity);
    CHECK(cat::classify_attribute("Wearing_Lipstick", MetricCell::of(0.1)) ==
          Taxonomy::femininity);

    CHECK(cat::classify_attribute("Smiling", MetricCell::of(3.0)) == Taxonomy::unbiased);
    CHECK(cat::classify_attribute("Smiling", MetricCell::of(4.999)) == Taxonomy::unbiased);
    // The cutoff itself is not unbiased: the comparison is strict.
    CHECK(cat::classify_attribute("Smiling", MetricCell::of(5.0)) == Taxonomy::aoi);
    CHECK(cat::classify_attribute("Smiling", MetricCell::undefined("n/a")) == Taxonomy::aoi);

    // Custom lists override the shipped ones.
    CHECK(cat::classify_attribute("Bald", cell, {}, {"Bald"}) == Taxonomy::femininity);
}

TEST_CASE("sex-correlated attribute lists match the shipped taxonomy") {
    const auto& masc = cat::masculinity_attributes();
    const auto& fem = cat::femininity_attributes();
    CHECK(masc.size() == 8);
    CHECK(fem.size() == 9);
    for (const char* name : {"5_o_Clock_Shadow", "Bald", "Bushy_Eyebrows", "Goatee",
                             "Mustache", "Sideburns", "Receding_Hairline", "Wearing_Necktie"})
        CHECK(std::find(masc.begin(), masc.end(), name) != masc.end());
    for (const char* name :
         {"Arched_Eyebrows", "Attractive", "Heavy_Makeup", "No_Beard", "Oval_Face",
          "Rosy_Cheeks", "Wearing_Earrings", "Wearing_Lipstick", "Wearing_Necklace"})
        CHECK(std::find(fem.begin(), fem.end(), name) != fem.end());
}

TEST_CASE("study renderings include the class column and dashes") {
    auto rows = cat::attribute_study(study_annotations(), study_predictions(), "Male");
    for (auto& row : rows) row.taxonomy = cat::classify_attribute(row.attribute, row.deo);

    const std::string table = cat::render_study_table(rows);
    CHECK(table.find("class") != std::string::npos);
    CHECK(table.find("masculinity") != std::string::npos);
    CHECK(table.find("unbiased") != std::string::npos);
    CHECK(table.find(" - ") != std::string::npos); // undefined AP(g0) for Bald

    const std::string js = cat::render_study_json(rows, "Male");
    CHECK(js.find("\"catkit-study\"") != std::string::npos);
    CHECK(js.find("\"protected\": \"Male\"") != std::string::npos);
    CHECK(js.find("\"taxonomy\": \"masculinity\"") != std::string::npos);
}
