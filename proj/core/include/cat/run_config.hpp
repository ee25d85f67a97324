#pragma once

#include <map>
#include <string>
#include <vector>

#include "cat/discovery.hpp"
#include "cat/metrics.hpp"

namespace cat {

/// The editable knobs of a pipeline run, loadable from a versioned JSON
/// file. Everything defaults to the shipped values; a config file only needs
/// the keys it overrides.
struct RunConfig {
    double intra_threshold;
    double inter_threshold;
    int kl_bins = 10;
    double kl_epsilon = 1e-6;
    double ba_threshold = 0.5;
    std::string tie_policy = "stable";
    std::vector<std::string> masculinity; // taxonomy overrides
    std::vector<std::string> femininity;
    std::map<std::string, LayerRange> layer_bands; // per-attribute overrides

    RunConfig();

    Thresholds thresholds() const;
    MetricsConfig metrics() const;

    /// Default band from overrides first, then the shipped registry.
    LayerRange layer_band(const std::string& attribute) const;

    void validate() const;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

} // namespace cat
