#include <algorithm>
#include <numeric>

#include <doctest.h>

#include "cat/planner.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using cat::AnnotationTable;
using cat::BalancePlan;
using cat::CountTable;
using cat::PlanCell;
using cat::PlanMode;

namespace {

/// 2x2 fixture: group totals 100/100, positives 24 vs 2.
CountTable skewed_table() {
    CountTable t;
    t.protected_attribute = "Male";
    t.group_totals = {100, 100};
    CountTable::Row row;
    row.attribute = "Attractive";
    row.positives = {24, 2};
    row.negatives = {76, 98};
    t.rows = {row};
    return t;
}

/// True iff removing one sample from any plan cell breaks an equality the
/// plan establishes.
bool is_minimal(const CountTable& table, const BalancePlan& plan) {
    for (std::size_t i = 0; i < plan.cells.size(); ++i) {
        BalancePlan smaller = plan;
        if (--smaller.cells[i].count == 0)
            smaller.cells.erase(smaller.cells.begin() + static_cast<std::ptrdiff_t>(i));
        if (cat::check_criteria(cat::apply_plan(table, smaller)).all_ok()) return false;
    }
    return true;
}

} // namespace

TEST_CASE("tabulate_counts computes exact 2x2 cells") {
    const AnnotationTable ann = cat::parse_annotations_text(
        "Male Smiling\n"
        "a 1 1\n"
        "b 1 0\n"
        "c 0 1\n"
        "d 0 1\n"
        "e 0 0\n",
        "inline");
    const CountTable t = cat::tabulate_counts(ann, "Male", {"Smiling"});
    CHECK(t.group_totals[0] == 3);
    CHECK(t.group_totals[1] == 2);
    const auto& row = t.row("Smiling");
    CHECK(row.positives[0] == 2);
    CHECK(row.positives[1] == 1);
    CHECK(row.negatives[0] == 1);
    CHECK(row.negatives[1] == 1);
    CHECK(row.group_sum(0) == 3);

    CHECK_THROWS_AS(cat::tabulate_counts(ann, "Male", {"Oval_Face"}), cat::IndexError);
    CHECK_THROWS_AS(cat::tabulate_counts(ann, "Oval_Face", {"Smiling"}), cat::IndexError);
}

TEST_CASE("check_criteria reports per-cell gaps") {
    const CountTable t = skewed_table();
    const cat::CriteriaReport r = cat::check_criteria(t);
    CHECK(r.dp_ok);
    CHECK(r.group_gap == 0);
    CHECK_FALSE(r.row("Attractive").eo_ok);
    CHECK_FALSE(r.row("Attractive").eodds_ok);
    CHECK(r.row("Attractive").positive_gap == -22);
    CHECK(r.row("Attractive").negative_gap == 22);
    CHECK_FALSE(r.all_ok());
}

TEST_CASE("supplement plan fills both cells of a skewed row and stays minimal") {
    const CountTable t = skewed_table();
    const BalancePlan plan = cat::plan_supplement(t, PlanMode::supplement);

    // 22 positives to group 1, 22 negatives to group 0, no identity padding.
    REQUIRE(plan.cells.size() == 2);
    CHECK(plan.synthetic_total() == 44);
    for (const auto& cell : plan.cells) {
        REQUIRE(cell.assignment.size() == 1);
        CHECK(cell.count == 22);
        const auto [attribute, value] = *cell.assignment.begin();
        CHECK(attribute == "Attractive");
        CHECK(cell.group == (value == 1 ? 1 : 0));
    }

    const CountTable after = cat::apply_plan(t, plan);
    CHECK(cat::check_criteria(after).all_ok());
    CHECK(after.group_totals[0] == 122);
    CHECK(after.group_totals[1] == 122);
    CHECK(is_minimal(t, plan));
}

TEST_CASE("group-total imbalance alone is fixed with identity-level padding") {
    // The canonical sex imbalance: 94,509 vs 68,261 training images.
    CountTable t;
    t.protected_attribute = "Male";
    t.group_totals = {94509, 68261};
    const BalancePlan plan = cat::plan_supplement(t, PlanMode::supplement);
    REQUIRE(plan.cells.size() == 1);
    CHECK(plan.cells[0].group == 1);
    CHECK(plan.cells[0].assignment.empty());
    CHECK(plan.cells[0].count == 26248);
    CHECK(cat::check_criteria(cat::apply_plan(t, plan)).all_ok());
    CHECK(is_minimal(t, plan));
}

TEST_CASE("supplement plans over random tables are sound and minimal") {
    for (std::uint64_t trial = 0; trial < 60; ++trial) {
        const AnnotationTable ann = oracle::random_annotations(
            40 + trial % 100, {"A", "B", "C"}, "Z", 900 + trial);
        const CountTable table = cat::tabulate_counts(ann, "Z", {"A", "B", "C"});
        const BalancePlan plan = cat::plan_supplement(table, PlanMode::supplement);
        const CountTable after = cat::apply_plan(table, plan);
        CHECK(cat::check_criteria(after).all_ok());
        CHECK(is_minimal(table, plan));
    }
}

TEST_CASE("same_size planning at count level") {
    // totals 8/12: keep floor(8/2)=4 per group, budget 4 synthetic per group.
    CountTable t;
    t.protected_attribute = "Z";
    t.group_totals = {8, 12};
    CountTable::Row row;
    row.attribute = "A";
    row.positives = {8, 3};
    row.negatives = {0, 9};
    t.rows = {row};

    const BalancePlan plan = cat::plan_supplement(t, PlanMode::same_size);
    CHECK(plan.mode == PlanMode::same_size);
    CHECK(plan.retained_original[0].empty());

    // Retention apportions 4 of (8,0) -> (4,0) and 4 of (3,9) -> (1,3);
    // fills then raise both groups to positives 4, negatives 3.
    CHECK(plan.synthetic_total(0) == 4);
    CHECK(plan.synthetic_total(1) == 4);
    const CountTable after = cat::apply_plan(t, plan);
    CHECK(after.group_totals[0] == 8);
    CHECK(after.group_totals[1] == 8);
    CHECK(cat::check_criteria(after).all_ok());
    CHECK(after.row("A").positives[0] == 4);
    CHECK(after.row("A").negatives[0] == 3);
    // One padding sample per group tops the budget up.
    long long pad[2] = {0, 0};
    for (const auto& cell : plan.cells)
        if (cell.assignment.empty()) pad[cell.group] += cell.count;
    CHECK(pad[0] == 1);
    CHECK(pad[1] == 1);
}

TEST_CASE("same_size planning fails loudly when the budget cannot balance") {
    CountTable t;
    t.protected_attribute = "Z";
    t.group_totals = {4, 4};
    CountTable::Row a, b;
    a.attribute = "A";
    a.positives = {4, 0};
    a.negatives = {0, 4};
    b.attribute = "B";
    b.positives = {0, 4};
    b.negatives = {4, 0};
    t.rows = {a, b};
    CHECK_THROWS_AS(cat::plan_supplement(t, PlanMode::same_size), cat::ConfigError);
}

TEST_CASE("row-level same_size retention is reproducible and balances") {
    const AnnotationTable ann =
        oracle::random_annotations(120, {"A", "B"}, "Z", 4242);
    const CountTable base = cat::tabulate_counts(ann, "Z", {"A", "B"});
    const long long m = std::min(base.group_totals[0], base.group_totals[1]);

    const BalancePlan plan = cat::plan_from_annotations(ann, "Z", {"A", "B"},
                                                        PlanMode::same_size, 7);
    for (int g : {0, 1}) {
        const auto gi = static_cast<std::size_t>(g);
        CHECK(plan.retained_original[gi].size() == static_cast<std::size_t>(m / 2));
        CHECK(std::is_sorted(plan.retained_original[gi].begin(),
                             plan.retained_original[gi].end()));
        const std::size_t z_col = ann.attribute_index("Z");
        for (const std::size_t idx : plan.retained_original[gi])
            CHECK(ann.values[idx][z_col] == static_cast<std::uint8_t>(g));
    }

    const BalancePlan again = cat::plan_from_annotations(ann, "Z", {"A", "B"},
                                                         PlanMode::same_size, 7);
    CHECK(again.retained_original == plan.retained_original);
    const BalancePlan other = cat::plan_from_annotations(ann, "Z", {"A", "B"},
                                                         PlanMode::same_size, 8);
    CHECK(other.retained_original != plan.retained_original);

    const CountTable after = cat::apply_plan(ann, {"A", "B"}, plan);
    CHECK(after.group_totals[0] == m);
    CHECK(after.group_totals[1] == m);
    CHECK(cat::check_criteria(after).all_ok());

    // Count-level simulation must refuse a plan with concrete row retention.
    CHECK_THROWS_AS(cat::apply_plan(base, plan), cat::ConfigError);
}

TEST_CASE("joint planning balances every full assignment cell") {
    const AnnotationTable ann =
        oracle::random_annotations(90, {"A", "B"}, "Z", 31337);
    const BalancePlan plan = cat::plan_joint_supplement(ann, "Z", {"A", "B"});

    for (const auto& cell : plan.cells) {
        CHECK(cell.assignment.size() == 2); // never identity padding
        CHECK(cell.assignment.count("A") == 1);
        CHECK(cell.assignment.count("B") == 1);
    }

    const CountTable after = cat::apply_plan(ann, {"A", "B"}, plan);
    CHECK(cat::check_criteria(after).all_ok());

    // Marginal balance follows from joint balance; check the joint cells too.
    AnnotationTable extended = ann;
    std::size_t synthetic = 0;
    for (const auto& cell : plan.cells)
        for (long long i = 0; i < cell.count; ++i) {
            extended.ids.push_back("joint" + std::to_string(synthetic++));
            extended.values.push_back({static_cast<std::uint8_t>(cell.assignment.at("A")),
                                       static_cast<std::uint8_t>(cell.assignment.at("B")),
                                       static_cast<std::uint8_t>(cell.group)});
        }
    for (int a : {0, 1})
        for (int b : {0, 1}) {
            long long per_group[2] = {0, 0};
            for (std::size_t r = 0; r < extended.row_count(); ++r)
                if (extended.values[r][0] == a && extended.values[r][1] == b)
                    ++per_group[extended.values[r][2]];
            CHECK(per_group[0] == per_group[1]);
        }

    CHECK_THROWS_AS(cat::plan_joint_supplement(ann, "Z", {}), cat::ConfigError);
    CHECK_THROWS_AS(cat::plan_joint_supplement(ann, "Z", {"A", "B", "Z"}), cat::ConfigError);
    CHECK_THROWS_AS(cat::plan_joint_supplement(ann, "Z", {"A", "A", "B", "B"}),
                    cat::ConfigError);
}

TEST_CASE("plans never assign two members of a mutually exclusive family") {
    BalancePlan plan;
    plan.protected_attribute = "Male";
    plan.cells.push_back(PlanCell{0, {{"Black_Hair", 1}, {"Blond_Hair", 1}}, 3});
    CHECK_THROWS_AS(plan.validate(), cat::ConflictError);

    // One positive plus one negative member is fine.
    plan.cells[0].assignment["Blond_Hair"] = 0;
    CHECK_NOTHROW(plan.validate());

    // Joint planning refuses data that forces a conflicting cell.
    const AnnotationTable dirty = cat::parse_annotations_text(
        "Black_Hair Blond_Hair Male\n"
        "a 1 1 0\n"
        "b 0 0 1\n",
        "inline");
    CHECK_THROWS_AS(cat::plan_joint_supplement(dirty, "Male", {"Black_Hair", "Blond_Hair"}),
                    cat::ConflictError);
}

TEST_CASE("plan validation rejects malformed cells") {
    BalancePlan plan;
    plan.protected_attribute = "Z";
    plan.cells.push_back(PlanCell{2, {}, 1});
    CHECK_THROWS_AS(plan.validate(), cat::ConfigError);
    plan.cells[0] = PlanCell{0, {}, -1};
    CHECK_THROWS_AS(plan.validate(), cat::ConfigError);
    plan.cells[0] = PlanCell{0, {{"Z", 1}}, 1};
    CHECK_THROWS_AS(plan.validate(), cat::ConfigError); // protected inside assignment
    plan.cells[0] = PlanCell{0, {{"A", 2}}, 1};
    CHECK_THROWS_AS(plan.validate(), cat::ConfigError);
}

TEST_CASE("resampling baseline undersamples the majority group") {
    const AnnotationTable ann = oracle::random_annotations(75, {"A"}, "Z", 555);
    const CountTable counts = cat::tabulate_counts(ann, "Z", {"A"});
    const long long m = std::min(counts.group_totals[0], counts.group_totals[1]);

    const auto kept = cat::resampling_baseline(ann, "Z", 99);
    CHECK(kept[0].size() == static_cast<std::size_t>(m));
    CHECK(kept[1].size() == static_cast<std::size_t>(m));
    const std::size_t z_col = ann.attribute_index("Z");
    for (int g : {0, 1}) {
        CHECK(std::is_sorted(kept[g].begin(), kept[g].end()));
        for (const std::size_t idx : kept[g])
            CHECK(ann.values[idx][z_col] == static_cast<std::uint8_t>(g));
    }
    CHECK(cat::resampling_baseline(ann, "Z", 99) == kept);
}

TEST_CASE("count tables and plans round-trip through their files") {
    testsupport::TempDir tmp;

    const AnnotationTable ann = oracle::random_annotations(50, {"A", "B"}, "Z", 808);
    const CountTable table = cat::tabulate_counts(ann, "Z", {"A", "B"});
    cat::save_count_table(table, tmp.file("counts.json"));
    const CountTable table_back = cat::load_count_table(tmp.file("counts.json"));
    CHECK(table_back.protected_attribute == table.protected_attribute);
    CHECK(table_back.group_totals == table.group_totals);
    REQUIRE(table_back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(table_back.rows[i].attribute == table.rows[i].attribute);
        CHECK(table_back.rows[i].positives == table.rows[i].positives);
        CHECK(table_back.rows[i].negatives == table.rows[i].negatives);
    }

    const BalancePlan plan =
        cat::plan_from_annotations(ann, "Z", {"A", "B"}, PlanMode::same_size, 3);
    cat::save_plan(plan, tmp.file("plan.json"));
    const BalancePlan plan_back = cat::load_plan(tmp.file("plan.json"));
    CHECK(plan_back.mode == plan.mode);
    CHECK(plan_back.protected_attribute == plan.protected_attribute);
    CHECK(plan_back.rng_seed == plan.rng_seed);
    CHECK(plan_back.retained_original == plan.retained_original);
    REQUIRE(plan_back.cells.size() == plan.cells.size());
    for (std::size_t i = 0; i < plan.cells.size(); ++i) {
        CHECK(plan_back.cells[i].group == plan.cells[i].group);
        CHECK(plan_back.cells[i].assignment == plan.cells[i].assignment);
        CHECK(plan_back.cells[i].count == plan.cells[i].count);
    }

    CHECK_THROWS_AS(cat::load_plan(tmp.file("counts.json")), cat::ParseError);
    CHECK_THROWS_AS(cat::load_count_table(tmp.file("missing.json")), cat::IoError);
}

TEST_CASE("count-table validation checks row/total consistency") {
    CountTable t = skewed_table();
    CHECK_NOTHROW(t.validate());
    t.rows[0].positives[0] = 90; // 90 + 76 > 100
    CHECK_THROWS_AS(t.validate(), cat::ConfigError);

    CountTable padded = skewed_table();
    padded.group_totals = {120, 120}; // totals exceed the labeled rows
    CHECK_THROWS_AS(padded.validate(), cat::ConfigError);
    CHECK_NOTHROW(padded.validate(/*allow_unlabeled=*/true));
    CHECK_THROWS_AS(padded.row("Nope"), cat::IndexError);
}
