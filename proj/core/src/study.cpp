#include "cat/study.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "cat/errors.hpp"
#include "cat/io_util.hpp"
#include "cat/registry.hpp"

namespace cat {

using nlohmann::json;

const char* to_string(Taxonomy t) {
    switch (t) {
        case Taxonomy::unbiased: return "unbiased";
        case Taxonomy::masculinity: return "masculinity";
        case Taxonomy::femininity: return "femininity";
        case Taxonomy::aoi: return "aoi";
    }
    return "aoi";
}

Taxonomy classify_attribute(const std::string& attribute, const MetricCell& deo,
                            const std::vector<std::string>& masculinity,
                            const std::vector<std::string>& femininity) {
    if (std::find(masculinity.begin(), masculinity.end(), attribute) != masculinity.end())
        return Taxonomy::masculinity;
    if (std::find(femininity.begin(), femininity.end(), attribute) != femininity.end())
        return Taxonomy::femininity;
    if (deo.defined && deo.value < 5.0) return Taxonomy::unbiased;
    return Taxonomy::aoi;
}

Taxonomy classify_attribute(const std::string& attribute, const MetricCell& deo) {
    return classify_attribute(attribute, deo, masculinity_attributes(),
                              femininity_attributes());
}

std::vector<AttributeStudyRow> attribute_study(const AnnotationTable& annotations,
                                               const PredictionTable& predictions,
                                               const std::string& protected_attribute) {
    annotations.validate();
    predictions.validate();
    const std::size_t z_col = annotations.attribute_index(protected_attribute);

    // Align prediction rows to annotation ids and cross-check the groups.
    std::unordered_map<std::string, std::size_t> pred_row;
    for (std::size_t r = 0; r < predictions.row_count(); ++r)
        pred_row.emplace(predictions.ids[r], r);
    std::vector<std::size_t> matched(annotations.row_count());
    for (std::size_t r = 0; r < annotations.row_count(); ++r) {
        const auto it = pred_row.find(annotations.ids[r]);
        if (it == pred_row.end())
            throw ConfigError("prediction table has no row for image id '" +
                              annotations.ids[r] + "'");
        matched[r] = it->second;
        if (predictions.groups[it->second] != annotations.values[r][z_col])
            throw ConflictError("image id '" + annotations.ids[r] +
                                "' has different protected groups in the annotation and "
                                "prediction tables");
    }

    std::vector<AttributeStudyRow> rows;
    for (std::size_t col = 0; col < annotations.attribute_count(); ++col) {
        const std::string& attribute = annotations.attributes[col];
        if (attribute == protected_attribute) continue;
        if (!predictions.has_attribute(attribute)) continue;
        const std::size_t pred_col = predictions.attribute_index(attribute);

        AttributeStudyRow row;
        row.attribute = attribute;

        std::array<long long, 2> pos{0, 0};
        std::array<long long, 2> total{0, 0};
        std::array<std::vector<double>, 2> scores;
        std::array<std::vector<std::uint8_t>, 2> labels;
        std::vector<double> all_scores;
        std::vector<std::uint8_t> all_labels;
        for (std::size_t r = 0; r < annotations.row_count(); ++r) {
            const auto g = static_cast<std::size_t>(annotations.values[r][z_col]);
            ++total[g];
            pos[g] += annotations.values[r][col];
            const std::size_t p = matched[r];
            scores[g].push_back(predictions.scores[p][pred_col]);
            labels[g].push_back(predictions.labels[p][pred_col]);
            all_scores.push_back(predictions.scores[p][pred_col]);
            all_labels.push_back(predictions.labels[p][pred_col]);
        }

        auto rate = [](long long p, long long t) {
            return t == 0 ? 0.0 : 100.0 * static_cast<double>(p) / static_cast<double>(t);
        };
        row.positive_rate_group0 = rate(pos[0], total[0]);
        row.positive_rate_group1 = rate(pos[1], total[1]);
        row.positive_rate_overall = rate(pos[0] + pos[1], total[0] + total[1]);

        MetricCell* group_ap[2] = {&row.ap_group0, &row.ap_group1};
        for (int g : {0, 1}) {
            const auto gi = static_cast<std::size_t>(g);
            try {
                *group_ap[g] =
                    MetricCell::of(average_precision(scores[gi], labels[gi]) * 100.0);
            } catch (const UndefinedMetricError& e) {
                *group_ap[g] = MetricCell::undefined(e.what());
            }
        }
        try {
            row.ap_overall = MetricCell::of(average_precision(all_scores, all_labels) * 100.0);
        } catch (const UndefinedMetricError& e) {
            row.ap_overall = MetricCell::undefined(e.what());
        }
        if (row.ap_group0.defined && row.ap_group1.defined)
            row.deo = MetricCell::of(
                deo_from_group_aps(row.ap_group1.value / 100.0, row.ap_group0.value / 100.0));
        else
            row.deo = MetricCell::undefined("AP undefined in some group");

        row.taxonomy = classify_attribute(attribute, row.deo);
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ConfigError("no non-protected attribute is covered by both tables");
    return rows;
}

namespace {

std::string dash_or_fixed(const MetricCell& cell) {
    return cell.defined ? format_fixed(cell.value, 1) : "-";
}

} // namespace

std::string render_study_table(const std::vector<AttributeStudyRow>& rows) {
    std::size_t name_width = std::string("attribute").size();
    for (const auto& r : rows) name_width = std::max(name_width, r.attribute.size());

    std::ostringstream out;
    auto line = [&](const std::string& name, const std::string& p0, const std::string& p1,
                    const std::string& pall, const std::string& a0, const std::string& a1,
                    const std::string& aall, const std::string& deo_s,
                    const std::string& cls) {
        out << name << std::string(name_width - name.size(), ' ');
        char buf[120];
        std::snprintf(buf, sizeof(buf), "  %8s %8s %8s %8s %8s %8s %8s  %s", p0.c_str(),
                      p1.c_str(), pall.c_str(), a0.c_str(), a1.c_str(), aall.c_str(),
                      deo_s.c_str(), cls.c_str());
        out << buf << "\n";
    };
    line("attribute", "pos%(g0)", "pos%(g1)", "pos%", "AP(g0)", "AP(g1)", "AP", "DEO",
         "class");
    for (const auto& r : rows)
        line(r.attribute, format_fixed(r.positive_rate_group0, 1),
             format_fixed(r.positive_rate_group1, 1),
             format_fixed(r.positive_rate_overall, 1), dash_or_fixed(r.ap_group0),
             dash_or_fixed(r.ap_group1), dash_or_fixed(r.ap_overall), dash_or_fixed(r.deo),
             to_string(r.taxonomy));
    return out.str();
}

namespace {

json cell_json(const MetricCell& cell) {
    if (!cell.defined) return {{"defined", false}, {"note", cell.note}};
    return {{"defined", true}, {"value", cell.value}};
}

} // namespace

std::string render_study_json(const std::vector<AttributeStudyRow>& rows,
                              const std::string& protected_attribute) {
    json j;
    j["format"] = "catkit-study";
    j["version"] = 1;
    j["protected"] = protected_attribute;
    json out_rows = json::array();
    for (const auto& r : rows)
        out_rows.push_back({{"attribute", r.attribute},
                            {"positive_rate_group0", r.positive_rate_group0},
                            {"positive_rate_group1", r.positive_rate_group1},
                            {"positive_rate_overall", r.positive_rate_overall},
                            {"ap_group0", cell_json(r.ap_group0)},
                            {"ap_group1", cell_json(r.ap_group1)},
                            {"ap_overall", cell_json(r.ap_overall)},
                            {"deo", cell_json(r.deo)},
                            {"taxonomy", to_string(r.taxonomy)}});
    j["rows"] = out_rows;
    return j.dump(2) + "\n";
}

} // namespace cat
