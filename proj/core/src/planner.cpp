#include "cat/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cat/errors.hpp"
#include "cat/io_util.hpp"
#include "cat/registry.hpp"
#include "cat/rng.hpp"

namespace cat {

using nlohmann::json;

// --- CountTable ---------------------------------------------------------------

long long CountTable::Row::group_sum(int group) const {
    return positives[static_cast<std::size_t>(group)] +
           negatives[static_cast<std::size_t>(group)];
}

const CountTable::Row& CountTable::row(const std::string& attribute) const {
    for (const auto& r : rows)
        if (r.attribute == attribute) return r;
    throw IndexError("count table has no row for attribute '" + attribute + "'");
}

bool CountTable::has_row(const std::string& attribute) const {
    return std::any_of(rows.begin(), rows.end(),
                       [&](const Row& r) { return r.attribute == attribute; });
}

void CountTable::validate(bool allow_unlabeled) const {
    if (protected_attribute.empty())
        throw ConfigError("count table has no protected attribute");
    if (group_totals[0] < 0 || group_totals[1] < 0)
        throw ConfigError("group totals must be non-negative");
    for (const auto& r : rows) {
        for (int g : {0, 1}) {
            const auto gi = static_cast<std::size_t>(g);
            if (r.positives[gi] < 0 || r.negatives[gi] < 0)
                throw ConfigError("counts must be non-negative (attribute '" + r.attribute +
                                  "')");
            const long long sum = r.group_sum(g);
            if (sum > group_totals[gi] || (!allow_unlabeled && sum != group_totals[gi]))
                throw ConfigError("attribute '" + r.attribute + "' group " +
                                  std::to_string(g) + " cells sum to " + std::to_string(sum) +
                                  " but the group total is " +
                                  std::to_string(group_totals[gi]));
        }
    }
}

// --- CriteriaReport -----------------------------------------------------------

const CriteriaReport::Row& CriteriaReport::row(const std::string& attribute) const {
    for (const auto& r : rows)
        if (r.attribute == attribute) return r;
    throw IndexError("criteria report has no row for attribute '" + attribute + "'");
}

bool CriteriaReport::all_ok() const {
    return dp_ok && std::all_of(rows.begin(), rows.end(),
                                [](const Row& r) { return r.eodds_ok; });
}

// --- PlanMode / BalancePlan ---------------------------------------------------

std::string to_string(PlanMode mode) {
    return mode == PlanMode::supplement ? "supplement" : "same_size";
}

PlanMode plan_mode_from_string(const std::string& name) {
    if (name == "supplement") return PlanMode::supplement;
    if (name == "same_size") return PlanMode::same_size;
    throw ConfigError("unknown plan mode '" + name + "' (expected supplement or same_size)");
}

long long BalancePlan::synthetic_total() const {
    return synthetic_total(0) + synthetic_total(1);
}

long long BalancePlan::synthetic_total(int group) const {
    long long total = 0;
    for (const auto& cell : cells)
        if (cell.group == group) total += cell.count;
    return total;
}

void BalancePlan::validate() const {
    if (protected_attribute.empty())
        throw ConfigError("plan has no protected attribute");
    for (const auto& cell : cells) {
        if (cell.group != 0 && cell.group != 1)
            throw ConfigError("plan cell group must be 0 or 1");
        if (cell.count < 0)
            throw ConfigError("plan cell counts must be non-negative");
        for (const auto& [attribute, value] : cell.assignment) {
            if (value != 0 && value != 1)
                throw ConfigError("plan assignment values must be 0 or 1 (attribute '" +
                                  attribute + "')");
            if (attribute == protected_attribute)
                throw ConfigError("plan cells must not assign the protected attribute");
            if (value == 1)
                for (const auto& [other, other_value] : cell.assignment)
                    if (other_value == 1 && same_exclusive_family(attribute, other))
                        throw ConflictError("plan cell assigns '" + attribute + "' and '" +
                                            other + "' positive, but they are mutually " +
                                            "exclusive");
        }
    }
}

// --- tabulate / check ---------------------------------------------------------

CountTable tabulate_counts(const AnnotationTable& annotations,
                           const std::string& protected_attribute,
                           const std::vector<std::string>& attributes_of_interest) {
    annotations.validate();
    const std::size_t z_col = annotations.attribute_index(protected_attribute);

    CountTable table;
    table.protected_attribute = protected_attribute;
    std::vector<std::size_t> cols;
    for (const auto& name : attributes_of_interest) {
        if (name == protected_attribute)
            throw ConfigError("protected attribute '" + name +
                              "' cannot also be an attribute of interest");
        cols.push_back(annotations.attribute_index(name));
        table.rows.push_back({name, {0, 0}, {0, 0}});
    }

    for (std::size_t r = 0; r < annotations.row_count(); ++r) {
        const int g = annotations.values[r][z_col];
        ++table.group_totals[static_cast<std::size_t>(g)];
        for (std::size_t a = 0; a < cols.size(); ++a) {
            auto& row = table.rows[a];
            if (annotations.values[r][cols[a]])
                ++row.positives[static_cast<std::size_t>(g)];
            else
                ++row.negatives[static_cast<std::size_t>(g)];
        }
    }
    table.validate();
    return table;
}

CriteriaReport check_criteria(const CountTable& table) {
    table.validate(/*allow_unlabeled=*/true);
    CriteriaReport report;
    report.group_gap = table.group_totals[1] - table.group_totals[0];
    report.dp_ok = report.group_gap == 0;
    for (const auto& r : table.rows) {
        CriteriaReport::Row out;
        out.attribute = r.attribute;
        out.positive_gap = r.positives[1] - r.positives[0];
        out.negative_gap = r.negatives[1] - r.negatives[0];
        out.eo_ok = out.positive_gap == 0;
        out.eodds_ok = out.eo_ok && out.negative_gap == 0;
        report.rows.push_back(out);
    }
    return report;
}

// --- Planning -----------------------------------------------------------------

namespace {

void add_cell(BalancePlan& plan, int group, std::map<std::string, int> assignment,
              long long count) {
    if (count > 0) plan.cells.push_back({group, std::move(assignment), count});
}

/// Splits `total` across two cells proportionally to (wa, wb) with the
/// largest-remainder rule; ties favor the first cell.
std::array<long long, 2> apportion_pair(long long total, long long wa, long long wb) {
    const long long w = wa + wb;
    if (w == 0) return {0, 0};
    const long long fa = total * wa / w;
    const long long fb = total * wb / w;
    long long leftover = total - fa - fb; // 0 or 1
    // remainders scaled by w to stay integral
    const long long ra = total * wa - fa * w;
    const long long rb = total * wb - fb * w;
    std::array<long long, 2> out{fa, fb};
    if (leftover > 0) out[ra >= rb ? 0 : 1] += leftover;
    return out;
}

/// Emits per-attribute fills so each retained 2x2 row becomes balanced, then
/// pads both groups to `budget` synthetic samples each.
void fill_to_balance(BalancePlan& plan, const std::vector<CountTable::Row>& retained,
                     long long budget) {
    std::array<long long, 2> used{0, 0};
    for (const auto& row : retained) {
        const long long pos_target = std::max(row.positives[0], row.positives[1]);
        const long long neg_target = std::max(row.negatives[0], row.negatives[1]);
        for (int g : {0, 1}) {
            const auto gi = static_cast<std::size_t>(g);
            add_cell(plan, g, {{row.attribute, 1}}, pos_target - row.positives[gi]);
            add_cell(plan, g, {{row.attribute, 0}}, neg_target - row.negatives[gi]);
            used[gi] += (pos_target - row.positives[gi]) + (neg_target - row.negatives[gi]);
        }
    }
    for (int g : {0, 1}) {
        const long long pad = budget - used[static_cast<std::size_t>(g)];
        if (pad < 0) {
            std::ostringstream msg;
            msg << "same_size plan infeasible: group " << g << " needs "
                << used[static_cast<std::size_t>(g)]
                << " synthetic samples to balance attributes but the budget is " << budget;
            throw ConfigError(msg.str());
        }
        add_cell(plan, g, {}, pad);
    }
}

BalancePlan plan_same_size_from_counts(const CountTable& table,
                                       const std::array<std::vector<std::size_t>, 2>* groups,
                                       std::uint64_t rng_seed) {
    BalancePlan plan;
    plan.mode = PlanMode::same_size;
    plan.protected_attribute = table.protected_attribute;
    plan.rng_seed = rng_seed;

    const long long m = std::min(table.group_totals[0], table.group_totals[1]);
    const long long retain = m / 2;

    std::vector<CountTable::Row> retained_rows;
    if (groups) {
        // Concrete retention: sample rows, then count what was kept.
        NormalSampler rng(mix_seed(rng_seed, "plan.retain"));
        for (int g : {0, 1}) {
            const auto gi = static_cast<std::size_t>(g);
            std::vector<std::size_t> pool = (*groups)[gi];
            for (std::size_t i = 0; i < static_cast<std::size_t>(retain); ++i) {
                const std::size_t j =
                    i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
                std::swap(pool[i], pool[j]);
            }
            pool.resize(static_cast<std::size_t>(retain));
            std::sort(pool.begin(), pool.end());
            plan.retained_original[gi] = std::move(pool);
        }
    } else {
        // Count-level retention: apportion each row to the retained size.
        for (const auto& row : table.rows) {
            CountTable::Row r;
            r.attribute = row.attribute;
            for (int g : {0, 1}) {
                const auto gi = static_cast<std::size_t>(g);
                const auto split = apportion_pair(retain, row.positives[gi], row.negatives[gi]);
                r.positives[gi] = split[0];
                r.negatives[gi] = split[1];
            }
            retained_rows.push_back(r);
        }
        fill_to_balance(plan, retained_rows, m - retain);
        plan.validate();
        return plan;
    }
    return plan; // caller fills attribute cells from the realized retention
}

} // namespace

BalancePlan plan_supplement(const CountTable& table, PlanMode mode, std::uint64_t rng_seed) {
    table.validate();
    if (mode == PlanMode::same_size)
        return plan_same_size_from_counts(table, nullptr, rng_seed);

    BalancePlan plan;
    plan.mode = PlanMode::supplement;
    plan.protected_attribute = table.protected_attribute;
    plan.rng_seed = rng_seed;

    std::array<long long, 2> added{0, 0};
    for (const auto& row : table.rows) {
        const long long pos_gap = row.positives[1] - row.positives[0];
        const long long neg_gap = row.negatives[1] - row.negatives[0];
        // Each gap goes to the smaller cell so the 2x2 row balances.
        add_cell(plan, pos_gap > 0 ? 0 : 1, {{row.attribute, 1}}, std::llabs(pos_gap));
        add_cell(plan, neg_gap > 0 ? 0 : 1, {{row.attribute, 0}}, std::llabs(neg_gap));
        added[pos_gap > 0 ? 0 : 1] += std::llabs(pos_gap);
        added[neg_gap > 0 ? 0 : 1] += std::llabs(neg_gap);
    }

    // Attribute fills shift the group totals; identity-level samples even
    // them out again.
    const long long total1 = table.group_totals[1] + added[1];
    const long long total0 = table.group_totals[0] + added[0];
    add_cell(plan, total1 > total0 ? 0 : 1, {}, std::llabs(total1 - total0));

    plan.validate();
    return plan;
}

BalancePlan plan_from_annotations(const AnnotationTable& annotations,
                                  const std::string& protected_attribute,
                                  const std::vector<std::string>& attributes_of_interest,
                                  PlanMode mode, std::uint64_t rng_seed) {
    const CountTable table =
        tabulate_counts(annotations, protected_attribute, attributes_of_interest);
    if (mode == PlanMode::supplement) return plan_supplement(table, mode, rng_seed);

    const std::size_t z_col = annotations.attribute_index(protected_attribute);
    std::array<std::vector<std::size_t>, 2> groups;
    for (std::size_t r = 0; r < annotations.row_count(); ++r)
        groups[annotations.values[r][z_col]].push_back(r);

    BalancePlan plan = plan_same_size_from_counts(table, &groups, rng_seed);

    // Count the retained cells, then fill the gaps with synthetic samples.
    std::vector<CountTable::Row> retained_rows;
    for (const auto& name : attributes_of_interest) {
        const std::size_t col = annotations.attribute_index(name);
        CountTable::Row r;
        r.attribute = name;
        for (int g : {0, 1}) {
            const auto gi = static_cast<std::size_t>(g);
            for (const std::size_t idx : plan.retained_original[gi]) {
                if (annotations.values[idx][col])
                    ++r.positives[gi];
                else
                    ++r.negatives[gi];
            }
        }
        retained_rows.push_back(r);
    }
    const long long m = std::min(table.group_totals[0], table.group_totals[1]);
    fill_to_balance(plan, retained_rows, m - m / 2);
    plan.validate();
    return plan;
}

BalancePlan plan_joint_supplement(const AnnotationTable& annotations,
                                  const std::string& protected_attribute,
                                  const std::vector<std::string>& attributes_of_interest,
                                  std::uint64_t rng_seed) {
    if (attributes_of_interest.empty() || attributes_of_interest.size() > 3)
        throw ConfigError("joint planning supports 1 to 3 attributes, got " +
                          std::to_string(attributes_of_interest.size()));
    annotations.validate();
    const std::size_t z_col = annotations.attribute_index(protected_attribute);
    std::vector<std::size_t> cols;
    for (const auto& name : attributes_of_interest) {
        if (name == protected_attribute)
            throw ConfigError("protected attribute '" + name +
                              "' cannot also be an attribute of interest");
        cols.push_back(annotations.attribute_index(name));
    }

    // Joint cell index: bit a set iff attribute a is positive.
    const std::size_t n_cells = std::size_t{1} << cols.size();
    std::array<std::vector<long long>, 2> counts{std::vector<long long>(n_cells, 0),
                                                 std::vector<long long>(n_cells, 0)};
    for (std::size_t r = 0; r < annotations.row_count(); ++r) {
        std::size_t cell = 0;
        for (std::size_t a = 0; a < cols.size(); ++a)
            if (annotations.values[r][cols[a]]) cell |= std::size_t{1} << a;
        ++counts[annotations.values[r][z_col]][cell];
    }

    BalancePlan plan;
    plan.mode = PlanMode::supplement;
    plan.protected_attribute = protected_attribute;
    plan.rng_seed = rng_seed;
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        const long long gap = counts[1][cell] - counts[0][cell];
        if (gap == 0) continue;
        std::map<std::string, int> assignment;
        for (std::size_t a = 0; a < cols.size(); ++a)
            assignment[attributes_of_interest[a]] =
                (cell >> a) & 1 ? 1 : 0;
        add_cell(plan, gap > 0 ? 0 : 1, std::move(assignment), std::llabs(gap));
    }
    plan.validate(); // rejects family-conflicting joint cells
    return plan;
}

namespace {

void add_plan_cells(CountTable& out, const BalancePlan& plan) {
    for (const auto& cell : plan.cells) {
        const auto gi = static_cast<std::size_t>(cell.group);
        out.group_totals[gi] += cell.count;
        for (const auto& [attribute, value] : cell.assignment) {
            if (!out.has_row(attribute))
                throw IndexError("plan assigns attribute '" + attribute +
                                 "' absent from the count table");
            for (auto& row : out.rows) {
                if (row.attribute != attribute) continue;
                (value ? row.positives : row.negatives)[gi] += cell.count;
            }
        }
    }
}

} // namespace

CountTable apply_plan(const CountTable& table, const BalancePlan& plan) {
    table.validate(/*allow_unlabeled=*/true);
    plan.validate();
    if (plan.protected_attribute != table.protected_attribute)
        throw ConfigError("plan protects '" + plan.protected_attribute +
                          "' but the table protects '" + table.protected_attribute + "'");
    if (!plan.retained_original[0].empty() || !plan.retained_original[1].empty())
        throw ConfigError("plan carries retained row indices; simulate it against the "
                          "annotations it was derived from");

    CountTable out = table;
    if (plan.mode == PlanMode::same_size) {
        // The mixed dataset starts from the retained half, not the full table.
        const long long m = std::min(table.group_totals[0], table.group_totals[1]);
        const long long retain = m / 2;
        out.group_totals = {retain, retain};
        for (auto& row : out.rows) {
            for (int g : {0, 1}) {
                const auto gi = static_cast<std::size_t>(g);
                const auto split =
                    apportion_pair(retain, row.positives[gi], row.negatives[gi]);
                row.positives[gi] = split[0];
                row.negatives[gi] = split[1];
            }
        }
    }

    add_plan_cells(out, plan);
    out.validate(/*allow_unlabeled=*/true);
    return out;
}

CountTable apply_plan(const AnnotationTable& annotations,
                      const std::vector<std::string>& attributes_of_interest,
                      const BalancePlan& plan) {
    plan.validate();
    const std::size_t z_col = annotations.attribute_index(plan.protected_attribute);
    std::vector<std::size_t> cols;
    for (const auto& name : attributes_of_interest)
        cols.push_back(annotations.attribute_index(name));

    // Row set of the mixed dataset before synthetic cells: everything for
    // supplement, the retained selection for same_size.
    std::vector<std::size_t> kept;
    if (plan.mode == PlanMode::supplement) {
        kept.resize(annotations.row_count());
        std::iota(kept.begin(), kept.end(), std::size_t{0});
    } else {
        for (const auto& side : plan.retained_original)
            kept.insert(kept.end(), side.begin(), side.end());
    }

    CountTable out;
    out.protected_attribute = plan.protected_attribute;
    for (const auto& name : attributes_of_interest)
        out.rows.push_back({name, {0, 0}, {0, 0}});
    for (const std::size_t r : kept) {
        if (r >= annotations.row_count())
            throw IndexError("plan retains row " + std::to_string(r) +
                             " beyond the annotation table");
        const int g = annotations.values[r][z_col];
        ++out.group_totals[static_cast<std::size_t>(g)];
        for (std::size_t a = 0; a < cols.size(); ++a) {
            auto& row = out.rows[a];
            if (annotations.values[r][cols[a]])
                ++row.positives[static_cast<std::size_t>(g)];
            else
                ++row.negatives[static_cast<std::size_t>(g)];
        }
    }

    add_plan_cells(out, plan);
    out.validate(/*allow_unlabeled=*/true);
    return out;
}

std::array<std::vector<std::size_t>, 2>
resampling_baseline(const AnnotationTable& annotations,
                    const std::string& protected_attribute, std::uint64_t rng_seed) {
    annotations.validate();
    const std::size_t z_col = annotations.attribute_index(protected_attribute);
    std::array<std::vector<std::size_t>, 2> groups;
    for (std::size_t r = 0; r < annotations.row_count(); ++r)
        groups[annotations.values[r][z_col]].push_back(r);
    if (groups[0].empty() || groups[1].empty())
        throw ConfigError("resampling needs both protected groups present");

    const std::size_t m = std::min(groups[0].size(), groups[1].size());
    NormalSampler rng(mix_seed(rng_seed, "plan.resample"));
    for (auto& pool : groups) {
        if (pool.size() == m) continue;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(m);
        std::sort(pool.begin(), pool.end());
    }
    return groups;
}

// --- Files --------------------------------------------------------------------

namespace {

constexpr const char* kCountsFormat = "catkit-counts";
constexpr const char* kPlanFormat = "catkit-plan";
constexpr int kFileVersion = 1;

} // namespace

void save_count_table(const CountTable& table, const std::string& path) {
    table.validate(/*allow_unlabeled=*/true);
    json j;
    j["format"] = kCountsFormat;
    j["version"] = kFileVersion;
    j["protected"] = table.protected_attribute;
    j["group_totals"] = table.group_totals;
    json rows = json::array();
    for (const auto& r : table.rows)
        rows.push_back({{"attribute", r.attribute},
                        {"positives", r.positives},
                        {"negatives", r.negatives}});
    j["rows"] = rows;
    atomic_write(path, j.dump(2) + "\n");
}

CountTable load_count_table(const std::string& path) {
    try {
        const json j = json::parse(read_file(path));
        if (j.at("format").get<std::string>() != kCountsFormat)
            throw ParseError(path + ": not a count-table file");
        if (j.at("version").get<int>() != kFileVersion)
            throw ParseError(path + ": unsupported count-table version");
        CountTable table;
        table.protected_attribute = j.at("protected").get<std::string>();
        table.group_totals = j.at("group_totals").get<std::array<long long, 2>>();
        for (const auto& entry : j.at("rows")) {
            CountTable::Row r;
            r.attribute = entry.at("attribute").get<std::string>();
            r.positives = entry.at("positives").get<std::array<long long, 2>>();
            r.negatives = entry.at("negatives").get<std::array<long long, 2>>();
            table.rows.push_back(std::move(r));
        }
        table.validate(/*allow_unlabeled=*/true);
        return table;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_plan(const BalancePlan& plan, const std::string& path) {
    plan.validate();
    json j;
    j["format"] = kPlanFormat;
    j["version"] = kFileVersion;
    j["mode"] = to_string(plan.mode);
    j["protected"] = plan.protected_attribute;
    j["rng_seed"] = plan.rng_seed;
    json cells = json::array();
    for (const auto& cell : plan.cells)
        cells.push_back({{"group", cell.group},
                         {"assignment", cell.assignment},
                         {"count", cell.count}});
    j["cells"] = cells;
    j["retained_original"] = plan.retained_original;
    atomic_write(path, j.dump(2) + "\n");
}

BalancePlan load_plan(const std::string& path) {
    try {
        const json j = json::parse(read_file(path));
        if (j.at("format").get<std::string>() != kPlanFormat)
            throw ParseError(path + ": not a plan file");
        if (j.at("version").get<int>() != kFileVersion)
            throw ParseError(path + ": unsupported plan version");
        BalancePlan plan;
        plan.mode = plan_mode_from_string(j.at("mode").get<std::string>());
        plan.protected_attribute = j.at("protected").get<std::string>();
        plan.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        for (const auto& entry : j.at("cells")) {
            PlanCell cell;
            cell.group = entry.at("group").get<int>();
            cell.assignment = entry.at("assignment").get<std::map<std::string, int>>();
            cell.count = entry.at("count").get<long long>();
            plan.cells.push_back(std::move(cell));
        }
        plan.retained_original =
            j.at("retained_original").get<std::array<std::vector<std::size_t>, 2>>();
        plan.validate();
        return plan;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace cat
