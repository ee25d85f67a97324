#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cat/annotations.hpp"

namespace cat {

/// Per-attribute 2x2 counts against a binary protected attribute, plus the
/// group totals. Index 0/1 is the protected-attribute value.
struct CountTable {
    struct Row {
        std::string attribute;
        std::array<long long, 2> positives{0, 0}; // positives[g] = n(protected = g, attr = 1)
        std::array<long long, 2> negatives{0, 0};

        long long group_sum(int group) const;
    };

    std::string protected_attribute;
    std::array<long long, 2> group_totals{0, 0};
    std::vector<Row> rows;

    const Row& row(const std::string& attribute) const;
    bool has_row(const std::string& attribute) const;

    /// Rows must agree on per-group sums; sums never exceed the group totals.
    /// Totals may exceed row sums only when `allow_unlabeled` (plan
    /// simulations add identity-level samples that carry no attribute cell).
    void validate(bool allow_unlabeled = false) const;
};

/// Which count equalities hold, and the signed per-cell gaps (group1 - group0).
struct CriteriaReport {
    struct Row {
        std::string attribute;
        bool eo_ok = false;    // n(Z, Y) == n(Z', Y)
        bool eodds_ok = false; // eo_ok and n(Z, Y') == n(Z', Y')
        long long positive_gap = 0;
        long long negative_gap = 0;
    };

    bool dp_ok = false; // group totals equal
    long long group_gap = 0;
    std::vector<Row> rows;

    const Row& row(const std::string& attribute) const;
    bool all_ok() const;
};

enum class PlanMode { supplement, same_size };

std::string to_string(PlanMode mode);
PlanMode plan_mode_from_string(const std::string& name);

/// One synthesis request: `count` samples for protected group `group` with
/// the given attribute assignment. An empty assignment is an identity-level
/// sample used to even out group totals.
struct PlanCell {
    int group = 0;
    std::map<std::string, int> assignment; // attribute -> {0, 1}
    long long count = 0;
};

struct BalancePlan {
    PlanMode mode = PlanMode::supplement;
    std::string protected_attribute;
    std::uint64_t rng_seed = 0;
    std::vector<PlanCell> cells;
    std::array<std::vector<std::size_t>, 2> retained_original; // row indices per group

    long long synthetic_total() const;
    long long synthetic_total(int group) const;

    void validate() const;
};

/// Exact 2x2 counts per attribute of interest.
/// Throws IndexError for missing columns.
CountTable tabulate_counts(const AnnotationTable& annotations,
                           const std::string& protected_attribute,
                           const std::vector<std::string>& attributes_of_interest);

CriteriaReport check_criteria(const CountTable& table);

/// Count-level planning.
///
/// supplement: per attribute, adds the positive/negative cell gaps to the
/// smaller side, then evens the group totals with identity-level cells. Adds
/// only, and every emitted count is minimal.
///
/// same_size: models the half-original + half-synthetic mix. Retention
/// counts are apportioned from the table (largest remainder); the returned
/// plan's retained_original is left empty because a bare CountTable carries
/// no row identity — use plan_from_annotations for concrete indices.
BalancePlan plan_supplement(const CountTable& table, PlanMode mode,
                            std::uint64_t rng_seed = 0);

/// Row-level planning over concrete annotations: tabulates, plans, and (in
/// same_size mode) fills retained_original with uniformly sampled row
/// indices whose realized cell counts drive the synthetic fills.
BalancePlan plan_from_annotations(const AnnotationTable& annotations,
                                  const std::string& protected_attribute,
                                  const std::vector<std::string>& attributes_of_interest,
                                  PlanMode mode, std::uint64_t rng_seed = 0);

/// Joint-cell planning over at most 3 attributes: balances every full
/// assignment cell across groups instead of each marginal separately.
BalancePlan plan_joint_supplement(const AnnotationTable& annotations,
                                  const std::string& protected_attribute,
                                  const std::vector<std::string>& attributes_of_interest,
                                  std::uint64_t rng_seed = 0);

/// Simulates a plan against the table it was computed from: attribute cells
/// add to their 2x2 rows, identity-level cells add to group totals only.
/// Count-level plans only; a plan carrying retained_original indices must be
/// simulated against the annotations it was derived from (overload below).
CountTable apply_plan(const CountTable& table, const BalancePlan& plan);

/// Simulates a row-level plan: tabulates the retained rows (all rows for
/// supplement mode), then adds the plan cells.
CountTable apply_plan(const AnnotationTable& annotations,
                      const std::vector<std::string>& attributes_of_interest,
                      const BalancePlan& plan);

/// Uniformly undersamples the majority group to the minority size. Returns
/// sorted row indices per group; reproducible for a fixed seed.
std::array<std::vector<std::size_t>, 2>
resampling_baseline(const AnnotationTable& annotations,
                    const std::string& protected_attribute, std::uint64_t rng_seed);

// --- Files ------------------------------------------------------------------

void save_count_table(const CountTable& table, const std::string& path);
CountTable load_count_table(const std::string& path);

void save_plan(const BalancePlan& plan, const std::string& path);
BalancePlan load_plan(const std::string& path);

} // namespace cat
