#pragma once

#include <string>
#include <vector>

#include "cat/annotations.hpp"
#include "cat/metrics.hpp"

namespace cat {

/// Attribute classes for the per-attribute bias study: sex-correlated lists
/// take precedence; otherwise DEO < 5 percentage points (strict) is
/// unbiased and everything else (including undefined DEO) is an attribute
/// of interest.
enum class Taxonomy { unbiased, masculinity, femininity, aoi };

const char* to_string(Taxonomy t);

struct AttributeStudyRow {
    std::string attribute;
    double positive_rate_group0 = 0.0; // percent, from the annotations
    double positive_rate_group1 = 0.0;
    double positive_rate_overall = 0.0;
    MetricCell ap_group0; // percent, from the predictions
    MetricCell ap_group1;
    MetricCell ap_overall;
    MetricCell deo; // percentage points
    Taxonomy taxonomy = Taxonomy::aoi;
};

/// One row per non-protected annotation attribute covered by the prediction
/// table: training positive rates per group, APs, DEO, taxonomy class.
/// Every annotation id must have a prediction row with a matching group.
std::vector<AttributeStudyRow> attribute_study(const AnnotationTable& annotations,
                                               const PredictionTable& predictions,
                                               const std::string& protected_attribute);

/// Taxonomy of a single attribute given its (possibly undefined) DEO, using
/// the default sex-correlated attribute lists.
Taxonomy classify_attribute(const std::string& attribute, const MetricCell& deo);

/// Same with explicit (config-supplied) attribute lists.
Taxonomy classify_attribute(const std::string& attribute, const MetricCell& deo,
                            const std::vector<std::string>& masculinity,
                            const std::vector<std::string>& femininity);

std::string render_study_table(const std::vector<AttributeStudyRow>& rows);
std::string render_study_json(const std::vector<AttributeStudyRow>& rows,
                              const std::string& protected_attribute);

} // namespace cat
