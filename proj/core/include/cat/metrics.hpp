#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cat/planner.hpp"

namespace cat {

/// Per-sample predictions: binary group, one (true label, score) pair per
/// attribute, optionally a fixed-dimension representation vector.
struct PredictionTable {
    std::vector<std::string> attributes;
    std::vector<std::string> ids;
    std::vector<int> groups;                          // 0/1 per row
    std::vector<std::vector<std::uint8_t>> labels;    // [row][attribute]
    std::vector<std::vector<double>> scores;          // [row][attribute], in [0,1]
    std::vector<std::vector<double>> representations; // [row][dim], may be empty

    std::size_t row_count() const { return ids.size(); }
    std::size_t attribute_index(const std::string& name) const;
    bool has_attribute(const std::string& name) const;
    std::size_t representation_dim() const;

    void validate() const;
};

/// CSV with header: id,group,<attr>:label,<attr>:score,...[,rep:0,rep:1,...]
PredictionTable parse_predictions(const std::string& path);
PredictionTable parse_predictions_text(const std::string& content,
                                       const std::string& origin);
void save_predictions(const PredictionTable& table, const std::string& path);

// --- Individual metrics -------------------------------------------------------

/// Tie handling for equal scores: `stable` keeps input order (documented
/// default); `pessimistic` ranks negatives above positives inside a tie.
enum class TiePolicy { stable, pessimistic };

/// AP = sum_k (R_k - R_{k-1}) * P_k over the score-descending ranking.
/// Throws UndefinedMetricError when there is no positive label.
double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels,
                         TiePolicy ties = TiePolicy::stable);

/// |AP_group1 - AP_group0| in percentage points.
double deo_from_group_aps(double ap_group1, double ap_group0);

/// DEO for one attribute of a prediction table; throws UndefinedMetricError
/// when either group has no positives.
double deo(const PredictionTable& pred, const std::string& attribute,
           TiePolicy ties = TiePolicy::stable);

/// BA = P(group = z* | predicted positive) - P(group = z* | positive)_train,
/// in percentage points, where z* is the training-majority group among
/// positives and predictions threshold at score > score_threshold. Positive
/// values mean the model over-represents the training majority.
/// Throws TieError when the training groups tie, UndefinedMetricError when
/// nothing is predicted positive.
double bias_amplification(const CountTable& train, const PredictionTable& pred,
                          const std::string& attribute, double score_threshold = 0.5);

/// Symmetrized conditional histogram divergence:
/// 0.5 * sum_{y in {0,1}} KL(H_group1(score | Y=y) || H_group0(score | Y=y))
/// over `bins` equal-width bins on [0,1] with additive smoothing `epsilon`
/// (natural log). Throws UndefinedMetricError when a conditional group is
/// empty.
double kl_score_divergence(const PredictionTable& pred, const std::string& attribute,
                           int bins = 10, double epsilon = 1e-6);

/// Squared sample distance correlation (V-statistic with double-centered
/// Euclidean distance matrices) between rows of X and the 0/1 labels z.
/// Returns 0 when either distance variance is 0; result clamped to [0,1].
double distance_correlation_sq(const std::vector<std::vector<double>>& X,
                               const std::vector<int>& z);

// --- Report assembly ----------------------------------------------------------

struct MetricsConfig {
    int kl_bins = 10;
    double kl_epsilon = 1e-6;
    double ba_threshold = 0.5;
    TiePolicy ties = TiePolicy::stable;
};

/// A metric value or the reason it is undefined (rendered as a dash).
struct MetricCell {
    bool defined = false;
    double value = 0.0;
    std::string note;

    static MetricCell of(double v) { return {true, v, {}}; }
    static MetricCell undefined(std::string why) { return {false, 0.0, std::move(why)}; }
};

struct MetricsReport {
    static constexpr const char* kFormulaVersion = "metrics-v1";

    struct Row {
        std::string attribute;
        MetricCell ap_overall; // percent
        MetricCell ap_group0;  // percent
        MetricCell ap_group1;  // percent
        MetricCell deo;        // percentage points
        MetricCell ba;         // percentage points
        MetricCell kl;         // nats
    };

    std::vector<Row> rows;
    /// Representation-level dependence on the group label; one value per
    /// report since all attribute columns share the representation.
    MetricCell dcor2;
    /// Means over the defined cells of each column.
    MetricCell mean_ap, mean_deo, mean_ba, mean_kl;
    MetricsConfig config;

    const Row& row(const std::string& attribute) const;
};

/// Computes every metric for every attribute. `train` feeds bias
/// amplification; without it BA cells are undefined. Per-cell errors are
/// recorded as undefined cells with notes, never dropped.
MetricsReport evaluate_all(const PredictionTable& pred, const CountTable* train,
                           const MetricsConfig& config = {});

/// Aligned text table (percent / percentage points, one decimal, dash for
/// undefined cells).
std::string render_report_table(const MetricsReport& report);

/// Machine-readable JSON rendering, embedding the configuration and formula
/// version.
std::string render_report_json(const MetricsReport& report);

void save_report(const MetricsReport& report, const std::string& json_path,
                 const std::string& table_path);

} // namespace cat
