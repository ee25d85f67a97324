#include "cat/run_config.hpp"

#include <nlohmann/json.hpp>

#include "cat/errors.hpp"
#include "cat/io_util.hpp"
#include "cat/registry.hpp"

namespace cat {

using nlohmann::json;

RunConfig::RunConfig()
    : intra_threshold(Thresholds().intra),
      inter_threshold(Thresholds().inter),
      masculinity(masculinity_attributes()),
      femininity(femininity_attributes()) {}

Thresholds RunConfig::thresholds() const { return {intra_threshold, inter_threshold}; }

MetricsConfig RunConfig::metrics() const {
    MetricsConfig m;
    m.kl_bins = kl_bins;
    m.kl_epsilon = kl_epsilon;
    m.ba_threshold = ba_threshold;
    m.ties = tie_policy == "pessimistic" ? TiePolicy::pessimistic : TiePolicy::stable;
    return m;
}

LayerRange RunConfig::layer_band(const std::string& attribute) const {
    const auto it = layer_bands.find(attribute);
    if (it != layer_bands.end()) return it->second;
    return default_layer_band(attribute);
}

void RunConfig::validate() const {
    thresholds().validate();
    if (kl_bins < 1) throw ConfigError("kl_bins must be at least 1");
    if (kl_epsilon <= 0.0) throw ConfigError("kl_epsilon must be positive");
    if (ba_threshold < 0.0 || ba_threshold > 1.0)
        throw ConfigError("ba_threshold must be in [0, 1]");
    if (tie_policy != "stable" && tie_policy != "pessimistic")
        throw ConfigError("tie_policy must be 'stable' or 'pessimistic'");
    for (const auto& [attribute, band] : layer_bands)
        if (band.lo < 0 || band.hi < band.lo)
            throw ConfigError("layer band for '" + attribute + "' is invalid");
}

namespace {

constexpr const char* kConfigFormat = "catkit-config";
constexpr int kConfigVersion = 1;

} // namespace

RunConfig load_run_config(const std::string& path) {
    try {
        const json j = json::parse(read_file(path));
        if (j.at("format").get<std::string>() != kConfigFormat)
            throw ParseError(path + ": not a run-config file");
        if (j.at("version").get<int>() != kConfigVersion)
            throw ParseError(path + ": unsupported config version");

        RunConfig config;
        if (j.contains("intra_threshold"))
            config.intra_threshold = j.at("intra_threshold").get<double>();
        if (j.contains("inter_threshold"))
            config.inter_threshold = j.at("inter_threshold").get<double>();
        if (j.contains("kl_bins")) config.kl_bins = j.at("kl_bins").get<int>();
        if (j.contains("kl_epsilon")) config.kl_epsilon = j.at("kl_epsilon").get<double>();
        if (j.contains("ba_threshold"))
            config.ba_threshold = j.at("ba_threshold").get<double>();
        if (j.contains("tie_policy"))
            config.tie_policy = j.at("tie_policy").get<std::string>();
        if (j.contains("masculinity"))
            config.masculinity = j.at("masculinity").get<std::vector<std::string>>();
        if (j.contains("femininity"))
            config.femininity = j.at("femininity").get<std::vector<std::string>>();
        if (j.contains("layer_bands")) {
            for (const auto& [attribute, band] : j.at("layer_bands").items()) {
                LayerRange range{band.at("lo").get<int>(), band.at("hi").get<int>()};
                config.layer_bands[attribute] = range;
            }
        }
        config.validate();
        return config;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_run_config(const RunConfig& config, const std::string& path) {
    config.validate();
    json j;
    j["format"] = kConfigFormat;
    j["version"] = kConfigVersion;
    j["intra_threshold"] = config.intra_threshold;
    j["inter_threshold"] = config.inter_threshold;
    j["kl_bins"] = config.kl_bins;
    j["kl_epsilon"] = config.kl_epsilon;
    j["ba_threshold"] = config.ba_threshold;
    j["tie_policy"] = config.tie_policy;
    j["masculinity"] = config.masculinity;
    j["femininity"] = config.femininity;
    json bands = json::object();
    for (const auto& [attribute, band] : config.layer_bands)
        bands[attribute] = {{"lo", band.lo}, {"hi", band.hi}};
    j["layer_bands"] = bands;
    atomic_write(path, j.dump(2) + "\n");
}

} // namespace cat
