#include "cat/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cat/errors.hpp"
#include "cat/io_util.hpp"

namespace cat {

using nlohmann::json;

// --- PredictionTable ----------------------------------------------------------

std::size_t PredictionTable::attribute_index(const std::string& name) const {
    const auto it = std::find(attributes.begin(), attributes.end(), name);
    if (it == attributes.end())
        throw IndexError("prediction table has no attribute '" + name + "'");
    return static_cast<std::size_t>(it - attributes.begin());
}

bool PredictionTable::has_attribute(const std::string& name) const {
    return std::find(attributes.begin(), attributes.end(), name) != attributes.end();
}

std::size_t PredictionTable::representation_dim() const {
    return representations.empty() ? 0 : representations.front().size();
}

void PredictionTable::validate() const {
    const std::size_t n = ids.size();
    if (groups.size() != n || labels.size() != n || scores.size() != n)
        throw ConfigError("prediction table columns disagree on the row count");
    if (!representations.empty() && representations.size() != n)
        throw ConfigError("representation rows disagree with the table row count");
    const std::size_t d = representation_dim();
    for (std::size_t r = 0; r < n; ++r) {
        if (groups[r] != 0 && groups[r] != 1)
            throw ConfigError("row " + std::to_string(r) + ": group must be 0 or 1");
        if (labels[r].size() != attributes.size() || scores[r].size() != attributes.size())
            throw ConfigError("row " + std::to_string(r) +
                              ": label/score count does not match the attribute list");
        for (const auto v : labels[r])
            if (v > 1) throw ConfigError("labels must be 0 or 1");
        for (const auto s : scores[r])
            if (!std::isfinite(s) || s < 0.0 || s > 1.0)
                throw ConfigError("row " + std::to_string(r) +
                                  ": scores must be finite in [0, 1]");
        if (!representations.empty() && representations[r].size() != d)
            throw ConfigError("row " + std::to_string(r) +
                              ": representation dimension changed mid-table");
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream iss(line);
    while (std::getline(iss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& tok, const std::string& origin, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": bad number '" + tok +
                         "'");
    }
}

} // namespace

PredictionTable parse_predictions_text(const std::string& content,
                                       const std::string& origin) {
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        throw ParseError(origin + ": empty prediction file");
    ++line_no;
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "id" || header[1] != "group")
        throw ParseError(origin + ": header must start with 'id,group'");

    PredictionTable table;
    std::vector<std::size_t> rep_cols;
    std::size_t col = 2;
    while (col < header.size()) {
        const std::string& name = header[col];
        if (name.rfind("rep:", 0) == 0) break;
        const auto sep = name.rfind(":label");
        if (sep == std::string::npos || sep + 6 != name.size())
            throw ParseError(origin + ": expected '<attribute>:label' at column " +
                             std::to_string(col) + ", got '" + name + "'");
        const std::string attribute = name.substr(0, sep);
        if (col + 1 >= header.size() || header[col + 1] != attribute + ":score")
            throw ParseError(origin + ": column '" + name + "' must be followed by '" +
                             attribute + ":score'");
        table.attributes.push_back(attribute);
        col += 2;
    }
    for (std::size_t i = 0; col < header.size(); ++col, ++i) {
        if (header[col] != "rep:" + std::to_string(i))
            throw ParseError(origin + ": representation columns must be rep:0, rep:1, ...; "
                             "got '" + header[col] + "'");
        rep_cols.push_back(col);
    }

    const std::size_t expected = 2 + 2 * table.attributes.size() + rep_cols.size();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != expected)
            throw ParseError(origin + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(expected) + " fields, got " +
                             std::to_string(fields.size()));
        table.ids.push_back(fields[0]);
        const double g = parse_double(fields[1], origin, line_no);
        table.groups.push_back(static_cast<int>(g));
        std::vector<std::uint8_t> row_labels;
        std::vector<double> row_scores;
        for (std::size_t a = 0; a < table.attributes.size(); ++a) {
            const double lab = parse_double(fields[2 + 2 * a], origin, line_no);
            if (lab != 0.0 && lab != 1.0)
                throw ParseError(origin + ":" + std::to_string(line_no) +
                                 ": labels must be 0 or 1");
            row_labels.push_back(static_cast<std::uint8_t>(lab));
            row_scores.push_back(parse_double(fields[3 + 2 * a], origin, line_no));
        }
        table.labels.push_back(std::move(row_labels));
        table.scores.push_back(std::move(row_scores));
        if (!rep_cols.empty()) {
            std::vector<double> rep;
            rep.reserve(rep_cols.size());
            for (const auto c : rep_cols) rep.push_back(parse_double(fields[c], origin, line_no));
            table.representations.push_back(std::move(rep));
        }
    }
    try {
        table.validate();
    } catch (const Error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    return table;
}

PredictionTable parse_predictions(const std::string& path) {
    return parse_predictions_text(read_file(path), path);
}

void save_predictions(const PredictionTable& table, const std::string& path) {
    table.validate();
    std::ostringstream out;
    out << "id,group";
    for (const auto& a : table.attributes) out << ',' << a << ":label," << a << ":score";
    for (std::size_t i = 0; i < table.representation_dim(); ++i) out << ",rep:" << i;
    out << "\n";
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        out << table.ids[r] << ',' << table.groups[r];
        for (std::size_t a = 0; a < table.attributes.size(); ++a)
            out << ',' << int(table.labels[r][a]) << ',' << format_float(table.scores[r][a]);
        if (!table.representations.empty())
            for (const auto v : table.representations[r]) out << ',' << format_float(v);
        out << "\n";
    }
    atomic_write(path, out.str());
}

// --- Average precision / DEO ----------------------------------------------------

double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels, TiePolicy ties) {
    if (scores.size() != labels.size())
        throw ConfigError("scores and labels differ in length");
    const long long total_pos = std::count(labels.begin(), labels.end(), std::uint8_t{1});
    if (total_pos == 0)
        throw UndefinedMetricError("average precision undefined: no positive labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        if (ties == TiePolicy::pessimistic && labels[a] != labels[b])
            return labels[a] < labels[b]; // negatives first inside a tie
        return false; // stable: keep input order
    });

    double ap = 0.0;
    long long seen_pos = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (!labels[order[k]]) continue;
        ++seen_pos;
        // Recall rises by 1/total_pos exactly at the positives, so the sum
        // collapses to the mean precision at the positive ranks.
        ap += static_cast<double>(seen_pos) / static_cast<double>(k + 1);
    }
    return ap / static_cast<double>(total_pos);
}

double deo_from_group_aps(double ap_group1, double ap_group0) {
    if (!std::isfinite(ap_group1) || !std::isfinite(ap_group0))
        throw ConfigError("group APs must be finite");
    return std::abs(ap_group1 - ap_group0) * 100.0;
}

namespace {

/// Scores/labels of one attribute restricted to one group.
std::pair<std::vector<double>, std::vector<std::uint8_t>>
group_slice(const PredictionTable& pred, std::size_t attr, int group) {
    std::pair<std::vector<double>, std::vector<std::uint8_t>> out;
    for (std::size_t r = 0; r < pred.row_count(); ++r) {
        if (pred.groups[r] != group) continue;
        out.first.push_back(pred.scores[r][attr]);
        out.second.push_back(pred.labels[r][attr]);
    }
    return out;
}

} // namespace

double deo(const PredictionTable& pred, const std::string& attribute, TiePolicy ties) {
    const std::size_t attr = pred.attribute_index(attribute);
    double aps[2];
    for (int g : {0, 1}) {
        const auto [scores, labels] = group_slice(pred, attr, g);
        if (std::count(labels.begin(), labels.end(), std::uint8_t{1}) == 0)
            throw UndefinedMetricError("DEO undefined for '" + attribute + "': group " +
                                       std::to_string(g) + " has no positives");
        aps[g] = average_precision(scores, labels, ties);
    }
    return deo_from_group_aps(aps[1], aps[0]);
}

// --- Bias amplification ---------------------------------------------------------

double bias_amplification(const CountTable& train, const PredictionTable& pred,
                          const std::string& attribute, double score_threshold) {
    const auto& trow = train.row(attribute);
    if (trow.positives[0] == trow.positives[1])
        throw TieError("bias amplification undefined for '" + attribute +
                       "': training groups tie on positives");
    const int z_star = trow.positives[1] > trow.positives[0] ? 1 : 0;
    const long long train_pos = trow.positives[0] + trow.positives[1];
    const double train_share =
        static_cast<double>(trow.positives[static_cast<std::size_t>(z_star)]) /
        static_cast<double>(train_pos);

    const std::size_t attr = pred.attribute_index(attribute);
    long long predicted = 0;
    long long predicted_star = 0;
    for (std::size_t r = 0; r < pred.row_count(); ++r) {
        if (!(pred.scores[r][attr] > score_threshold)) continue;
        ++predicted;
        if (pred.groups[r] == z_star) ++predicted_star;
    }
    if (predicted == 0)
        throw UndefinedMetricError("bias amplification undefined for '" + attribute +
                                   "': nothing predicted positive");
    const double predicted_share =
        static_cast<double>(predicted_star) / static_cast<double>(predicted);
    return (predicted_share - train_share) * 100.0;
}

// --- KL score divergence ---------------------------------------------------------

double kl_score_divergence(const PredictionTable& pred, const std::string& attribute,
                           int bins, double epsilon) {
    if (bins < 1) throw ConfigError("KL needs at least 1 bin");
    if (epsilon <= 0.0) throw ConfigError("KL smoothing must be positive");
    const std::size_t attr = pred.attribute_index(attribute);

    double total = 0.0;
    for (int y : {0, 1}) {
        std::array<std::vector<long long>, 2> hist{
            std::vector<long long>(static_cast<std::size_t>(bins), 0),
            std::vector<long long>(static_cast<std::size_t>(bins), 0)};
        std::array<long long, 2> n{0, 0};
        for (std::size_t r = 0; r < pred.row_count(); ++r) {
            if (pred.labels[r][attr] != y) continue;
            const int g = pred.groups[r];
            const auto bin = std::min<std::size_t>(
                static_cast<std::size_t>(pred.scores[r][attr] * bins),
                static_cast<std::size_t>(bins - 1));
            ++hist[static_cast<std::size_t>(g)][bin];
            ++n[static_cast<std::size_t>(g)];
        }
        for (int g : {0, 1})
            if (n[static_cast<std::size_t>(g)] == 0)
                throw UndefinedMetricError("KL undefined for '" + attribute + "': group " +
                                           std::to_string(g) + " has no samples with label " +
                                           std::to_string(y));
        double kl = 0.0;
        for (int b = 0; b < bins; ++b) {
            const double denom1 = static_cast<double>(n[1]) + bins * epsilon;
            const double denom0 = static_cast<double>(n[0]) + bins * epsilon;
            const double p = (static_cast<double>(hist[1][static_cast<std::size_t>(b)]) + epsilon) / denom1;
            const double q = (static_cast<double>(hist[0][static_cast<std::size_t>(b)]) + epsilon) / denom0;
            kl += p * std::log(p / q);
        }
        total += kl;
    }
    return 0.5 * total;
}

// --- Distance correlation ---------------------------------------------------------

namespace {

/// Double-centers the distance matrix in place and returns it.
std::vector<double> double_center(std::vector<double> d, std::size_t n) {
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum += d[j * n + k];
        row_mean[j] = sum / static_cast<double>(n);
        grand += sum;
    }
    grand /= static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            d[j * n + k] += grand - row_mean[j] - row_mean[k];
    return d;
}

double matrix_dot_mean(const std::vector<double>& a, const std::vector<double>& b,
                       std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) sum += a[i] * b[i];
    return sum / (static_cast<double>(n) * static_cast<double>(n));
}

} // namespace

double distance_correlation_sq(const std::vector<std::vector<double>>& X,
                               const std::vector<int>& z) {
    const std::size_t n = X.size();
    if (n < 2) throw ConfigError("distance correlation needs at least 2 samples");
    if (z.size() != n) throw ConfigError("representation and label counts differ");
    const std::size_t d = X.front().size();
    for (const auto& row : X) {
        if (row.size() != d) throw ConfigError("representation rows differ in dimension");
        for (const auto v : row)
            if (!std::isfinite(v)) throw ConfigError("representations must be finite");
    }
    for (const auto v : z)
        if (v != 0 && v != 1) throw ConfigError("group labels must be 0 or 1");

    std::vector<double> a(n * n, 0.0);
    std::vector<double> b(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = X[j][c] - X[k][c];
                sq += diff * diff;
            }
            const double dist = std::sqrt(sq);
            a[j * n + k] = a[k * n + j] = dist;
            b[j * n + k] = b[k * n + j] = std::abs(z[j] - z[k]);
        }
    }
    a = double_center(std::move(a), n);
    b = double_center(std::move(b), n);

    const double dcov2 = matrix_dot_mean(a, b, n);
    const double dvar_a = matrix_dot_mean(a, a, n);
    const double dvar_b = matrix_dot_mean(b, b, n);
    if (dvar_a <= 0.0 || dvar_b <= 0.0) return 0.0;
    const double r = dcov2 / std::sqrt(dvar_a * dvar_b);
    return std::clamp(r, 0.0, 1.0);
}

// --- Report assembly ----------------------------------------------------------------

namespace {

MetricCell guarded(const std::function<double()>& compute) {
    try {
        return MetricCell::of(compute());
    } catch (const UndefinedMetricError& e) {
        return MetricCell::undefined(e.what());
    } catch (const TieError& e) {
        return MetricCell::undefined(e.what());
    }
}

MetricCell mean_of(const std::vector<const MetricCell*>& cells) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto* c : cells)
        if (c->defined) {
            sum += c->value;
            ++n;
        }
    if (n == 0) return MetricCell::undefined("no defined cells");
    return MetricCell::of(sum / static_cast<double>(n));
}

} // namespace

const MetricsReport::Row& MetricsReport::row(const std::string& attribute) const {
    for (const auto& r : rows)
        if (r.attribute == attribute) return r;
    throw IndexError("report has no row for attribute '" + attribute + "'");
}

MetricsReport evaluate_all(const PredictionTable& pred, const CountTable* train,
                           const MetricsConfig& config) {
    pred.validate();
    MetricsReport report;
    report.config = config;

    for (const auto& attribute : pred.attributes) {
        const std::size_t attr = pred.attribute_index(attribute);
        MetricsReport::Row row;
        row.attribute = attribute;

        row.ap_overall = guarded([&] {
            std::vector<double> scores;
            std::vector<std::uint8_t> labels;
            for (std::size_t r = 0; r < pred.row_count(); ++r) {
                scores.push_back(pred.scores[r][attr]);
                labels.push_back(pred.labels[r][attr]);
            }
            return average_precision(scores, labels, config.ties) * 100.0;
        });
        MetricCell* per_group[2] = {&row.ap_group0, &row.ap_group1};
        for (int g : {0, 1})
            *per_group[g] = guarded([&, g] {
                const auto [scores, labels] = group_slice(pred, attr, g);
                if (std::count(labels.begin(), labels.end(), std::uint8_t{1}) == 0)
                    throw UndefinedMetricError("no positives in group " + std::to_string(g));
                return average_precision(scores, labels, config.ties) * 100.0;
            });
        row.deo = guarded([&] { return deo(pred, attribute, config.ties); });
        if (train && train->has_row(attribute))
            row.ba = guarded(
                [&] { return bias_amplification(*train, pred, attribute, config.ba_threshold); });
        else
            row.ba = MetricCell::undefined("no training counts supplied");
        row.kl = guarded(
            [&] { return kl_score_divergence(pred, attribute, config.kl_bins, config.kl_epsilon); });
        report.rows.push_back(std::move(row));
    }

    if (pred.representation_dim() > 0)
        report.dcor2 = guarded(
            [&] { return distance_correlation_sq(pred.representations, pred.groups); });
    else
        report.dcor2 = MetricCell::undefined("no representation columns");

    std::vector<const MetricCell*> aps, deos, bas, kls;
    for (const auto& r : report.rows) {
        aps.push_back(&r.ap_overall);
        deos.push_back(&r.deo);
        bas.push_back(&r.ba);
        kls.push_back(&r.kl);
    }
    report.mean_ap = mean_of(aps);
    report.mean_deo = mean_of(deos);
    report.mean_ba = mean_of(bas);
    report.mean_kl = mean_of(kls);
    return report;
}

namespace {

std::string cell_fixed(const MetricCell& cell, int decimals = 1) {
    if (!cell.defined) return "-";
    return format_fixed(cell.value, decimals);
}

} // namespace

std::string render_report_table(const MetricsReport& report) {
    // Column widths: attribute names vary, numbers are short.
    std::size_t name_width = std::string("attribute").size();
    for (const auto& r : report.rows) name_width = std::max(name_width, r.attribute.size());

    std::ostringstream out;
    auto line = [&](const std::string& name, const std::string& ap, const std::string& ap0,
                    const std::string& ap1, const std::string& deo_s, const std::string& ba_s,
                    const std::string& kl_s) {
        out << name;
        out << std::string(name_width - name.size(), ' ');
        char buf[96];
        std::snprintf(buf, sizeof(buf), "  %8s %8s %8s %8s %8s %8s", ap.c_str(), ap0.c_str(),
                      ap1.c_str(), deo_s.c_str(), ba_s.c_str(), kl_s.c_str());
        out << buf << "\n";
    };
    line("attribute", "AP", "AP(g0)", "AP(g1)", "DEO", "BA", "KL");
    for (const auto& r : report.rows)
        line(r.attribute, cell_fixed(r.ap_overall), cell_fixed(r.ap_group0),
             cell_fixed(r.ap_group1), cell_fixed(r.deo), cell_fixed(r.ba),
             cell_fixed(r.kl, 4));
    line("mean", cell_fixed(report.mean_ap), "-", "-", cell_fixed(report.mean_deo),
         cell_fixed(report.mean_ba), cell_fixed(report.mean_kl, 4));
    out << "dcor2: " << (report.dcor2.defined ? format_fixed(report.dcor2.value, 4) : "-")
        << "\n";
    return out.str();
}

namespace {

json cell_json(const MetricCell& cell) {
    if (!cell.defined) return {{"defined", false}, {"note", cell.note}};
    return {{"defined", true}, {"value", cell.value}};
}

} // namespace

std::string render_report_json(const MetricsReport& report) {
    json j;
    j["format"] = "catkit-report";
    j["version"] = 1;
    j["formula_version"] = MetricsReport::kFormulaVersion;
    j["config"] = {
        {"kl_bins", report.config.kl_bins},
        {"kl_epsilon", report.config.kl_epsilon},
        {"ba_threshold", report.config.ba_threshold},
        {"tie_policy", report.config.ties == TiePolicy::stable ? "stable" : "pessimistic"},
    };
    json rows = json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"attribute", r.attribute},
                        {"ap_overall", cell_json(r.ap_overall)},
                        {"ap_group0", cell_json(r.ap_group0)},
                        {"ap_group1", cell_json(r.ap_group1)},
                        {"deo", cell_json(r.deo)},
                        {"ba", cell_json(r.ba)},
                        {"kl", cell_json(r.kl)}});
    j["rows"] = rows;
    j["dcor2"] = cell_json(report.dcor2);
    j["means"] = {{"ap", cell_json(report.mean_ap)},
                  {"deo", cell_json(report.mean_deo)},
                  {"ba", cell_json(report.mean_ba)},
                  {"kl", cell_json(report.mean_kl)}};
    return j.dump(2) + "\n";
}

void save_report(const MetricsReport& report, const std::string& json_path,
                 const std::string& table_path) {
    atomic_write(json_path, render_report_json(report));
    atomic_write(table_path, render_report_table(report));
}

} // namespace cat
