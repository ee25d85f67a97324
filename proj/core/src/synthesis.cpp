#include "cat/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cat/errors.hpp"
#include "cat/io_util.hpp"
#include "cat/rng.hpp"

namespace cat {

using nlohmann::json;

// --- Toy generator ------------------------------------------------------------

void ToyAttribute::validate(const LatentConfig& cfg) const {
    if (name.empty())
        throw ConfigError("toy attribute name must not be empty");
    control_layers.validate(cfg.layers);
    if (control_dims.empty())
        throw ConfigError("toy attribute '" + name + "' controls no dimensions");
    if (!std::is_sorted(control_dims.begin(), control_dims.end()) ||
        std::adjacent_find(control_dims.begin(), control_dims.end()) != control_dims.end())
        throw ConfigError("control dims of '" + name + "' must be strictly increasing");
    if (control_dims.front() < 0 || control_dims.back() >= cfg.dims_per_layer)
        throw IndexError("control dims of '" + name + "' out of range");
    if (!(shift > threshold) || !(threshold > 0.0))
        throw ConfigError("toy attribute '" + name +
                          "' needs shift > threshold > 0 for separable labels");
    if (jitter < 0.0)
        throw ConfigError("toy attribute '" + name + "' jitter must be non-negative");
}

const ToyAttribute& ToyGeneratorSpec::attribute(const std::string& name) const {
    for (const auto& a : attributes)
        if (a.name == name) return a;
    throw IndexError("toy generator has no attribute '" + name + "'");
}

bool ToyGeneratorSpec::has_attribute(const std::string& name) const {
    return std::any_of(attributes.begin(), attributes.end(),
                       [&](const ToyAttribute& a) { return a.name == name; });
}

void ToyGeneratorSpec::validate() const {
    latent.validate();
    if (noise < 0.0)
        throw ConfigError("toy generator noise must be non-negative");
    if (extra_features < 0)
        throw ConfigError("extra feature count must be non-negative");
    std::set<std::pair<int, int>> cells;
    std::set<std::string> names;
    for (const auto& a : attributes) {
        a.validate(latent);
        if (!names.insert(a.name).second)
            throw ConfigError("duplicate toy attribute '" + a.name + "'");
        for (int layer = a.control_layers.lo; layer <= a.control_layers.hi; ++layer)
            for (const int dim : a.control_dims)
                if (!cells.insert({layer, dim}).second)
                    throw ConflictError("toy attributes overlap at layer " +
                                        std::to_string(layer) + " dim " +
                                        std::to_string(dim));
    }
}

ToyGenerator::ToyGenerator(ToyGeneratorSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const std::size_t cells = static_cast<std::size_t>(spec_.latent.layers) *
                              static_cast<std::size_t>(spec_.latent.dims_per_layer);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cells));
    for (int e = 0; e < spec_.extra_features; ++e) {
        NormalSampler rng(mix_seed(spec_.feature_seed, "toy.mixing",
                                   static_cast<std::uint64_t>(e)));
        std::vector<double> weights(cells);
        for (auto& w : weights) w = rng.next() * scale;
        mixing_.push_back(std::move(weights));
    }
}

std::size_t ToyGenerator::output_dim() const {
    return spec_.attributes.size() + static_cast<std::size_t>(spec_.extra_features);
}

ImageVector ToyGenerator::render(const LayeredLatent& latent) const {
    if (!latent.same_shape(spec_.latent))
        throw ConfigError("latent shape does not match the generator profile");
    latent.check_finite();

    // Noise keyed by content so identical latents render identically.
    const std::uint64_t content = fnv1a(latent.values().data(),
                                        latent.values().size() * sizeof(float));
    NormalSampler noise_rng(mix_seed(spec_.feature_seed, "toy.noise", content));

    ImageVector out;
    out.features.reserve(output_dim());
    for (const auto& a : spec_.attributes) {
        double sum = 0.0;
        std::size_t n = 0;
        for (int layer = a.control_layers.lo; layer <= a.control_layers.hi; ++layer)
            for (const int dim : a.control_dims) {
                sum += static_cast<double>(latent.at(layer, dim));
                ++n;
            }
        out.features.push_back(sum / static_cast<double>(n) +
                               spec_.noise * noise_rng.next());
    }
    for (const auto& weights : mixing_) {
        double dot = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i)
            dot += weights[i] * static_cast<double>(latent.values()[i]);
        out.features.push_back(dot);
    }
    return out;
}

std::map<std::string, int> oracle_annotate(const ImageVector& image,
                                           const ToyGeneratorSpec& spec) {
    if (image.features.size() < spec.attributes.size())
        throw ConfigError("image has " + std::to_string(image.features.size()) +
                          " features but the spec defines " +
                          std::to_string(spec.attributes.size()) + " attributes");
    std::map<std::string, int> labels;
    for (std::size_t i = 0; i < spec.attributes.size(); ++i)
        labels[spec.attributes[i].name] =
            image.features[i] > spec.attributes[i].threshold ? 1 : 0;
    return labels;
}

// --- Attribute application ---------------------------------------------------

LayeredLatent apply_attribute(const LayeredLatent& identity, const AttributeSignature& sig,
                              const LayeredLatent& donor) {
    if (!identity.same_shape(donor))
        throw ConfigError("identity and donor latent shapes differ");
    sig.layer_range.validate(identity.layers());

    LayeredLatent out = identity;
    for (const auto& mask : sig.masks) {
        for (const int dim : mask.dims) {
            if (dim >= identity.dims_per_layer())
                throw IndexError("signature dim " + std::to_string(dim) +
                                 " out of range for the latent profile");
            out.at(mask.layer, dim) = donor.at(mask.layer, dim);
        }
    }
    return out;
}

LayeredLatent apply_attributes(const LayeredLatent& identity,
                               const std::vector<const AttributeSignature*>& sigs,
                               const std::vector<const LayeredLatent*>& donors) {
    if (sigs.size() != donors.size())
        throw ConfigError("signature and donor counts differ");

    std::map<std::pair<int, int>, const AttributeSignature*> owner;
    for (const auto* sig : sigs) {
        for (const auto& mask : sig->masks) {
            for (const int dim : mask.dims) {
                const auto [it, inserted] = owner.try_emplace({mask.layer, dim}, sig);
                if (!inserted)
                    throw ConflictError("signatures '" + it->second->label + "' and '" +
                                        sig->label + "' both assign layer " +
                                        std::to_string(mask.layer) + " dim " +
                                        std::to_string(dim));
            }
        }
    }

    LayeredLatent out = identity;
    for (std::size_t i = 0; i < sigs.size(); ++i)
        out = apply_attribute(out, *sigs[i], *donors[i]);
    return out;
}

// --- Signature registry -------------------------------------------------------

void SignatureRegistry::add(AttributeSignature sig) {
    sig.validate();
    if (sig.donor_pool.empty())
        throw ConfigError("registry signatures need a donor pool");
    const auto key = std::make_pair(sig.label, sig.donor_pool.polarity);
    if (entries_.count(key))
        throw ConflictError("signature for '" + sig.label + "' (" +
                            to_string(sig.donor_pool.polarity) + ") already registered");
    entries_.emplace(key, std::move(sig));
}

bool SignatureRegistry::contains(const std::string& label, Polarity polarity) const {
    return entries_.count({label, polarity}) != 0;
}

const AttributeSignature& SignatureRegistry::get(const std::string& label,
                                                 Polarity polarity) const {
    const auto it = entries_.find({label, polarity});
    if (it == entries_.end())
        throw UnknownSignatureError("no signature for attribute '" + label + "' with " +
                                    std::string(to_string(polarity)) + " polarity");
    return it->second;
}

std::vector<std::string> SignatureRegistry::labels() const {
    std::vector<std::string> out;
    for (const auto& [key, sig] : entries_)
        if (out.empty() || out.back() != key.first) out.push_back(key.first);
    return out;
}

// --- Batch synthesis ----------------------------------------------------------

namespace {

LayeredLatent draw_latent(NormalSampler& rng, const LatentConfig& cfg) {
    LayeredLatent out(cfg.layers, cfg.dims_per_layer);
    for (auto& v : out.values()) v = static_cast<float>(rng.next());
    return out;
}

std::string assignment_fingerprint(const std::map<std::string, int>& assignment) {
    std::string canon;
    for (const auto& [attribute, value] : assignment)
        canon += attribute + "=" + std::to_string(value) + ";";
    return canon;
}

std::string sample_id(std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "syn-%06zu", index);
    return buf;
}

} // namespace

std::vector<LabeledSample> synthesize_batch(const BalancePlan& plan,
                                            const SignatureRegistry& registry,
                                            const Generator& generator,
                                            const SynthesisOptions& options) {
    plan.validate();
    const LatentConfig& cfg = generator.latent_config();

    std::vector<LabeledSample> out;
    std::size_t index = 0;
    for (const auto& cell : plan.cells) {
        // The cell's attributes plus the protected group itself.
        std::map<std::string, int> assignment = cell.assignment;
        assignment[plan.protected_attribute] = cell.group;

        std::vector<const AttributeSignature*> sigs;
        for (const auto& [attribute, value] : assignment) {
            const auto& sig = registry.get(
                attribute, value ? Polarity::positive : Polarity::negative);
            if (!sig.donor_pool.members.front().same_shape(cfg))
                throw ConfigError("signature '" + attribute +
                                  "' was discovered on a different latent profile");
            sigs.push_back(&sig);
        }

        // Paired mode keys streams by the non-protected assignment, so the
        // same facial-attribute cell in both groups reuses identities/donors.
        const std::uint64_t pair_key = fnv1a(assignment_fingerprint(cell.assignment));

        for (long long i = 0; i < cell.count; ++i, ++index) {
            const std::uint64_t sample_key =
                options.paired
                    ? mix_seed(mix_seed(options.rng_seed, "synthesis.identity", pair_key),
                               static_cast<std::uint64_t>(i))
                    : mix_seed(options.rng_seed, "synthesis.identity", index);
            NormalSampler id_rng(sample_key);
            const LayeredLatent identity = draw_latent(id_rng, cfg);

            std::vector<const LayeredLatent*> donors;
            donors.reserve(sigs.size());
            for (const auto* sig : sigs) {
                const std::uint64_t donor_key =
                    options.paired
                        ? mix_seed(mix_seed(options.rng_seed, "synthesis.donor",
                                            mix_seed(pair_key, fnv1a(sig->label))),
                                   static_cast<std::uint64_t>(i))
                        : mix_seed(mix_seed(options.rng_seed, "synthesis.donor", index),
                                   fnv1a(sig->label));
                NormalSampler donor_rng(donor_key);
                const std::size_t pick = static_cast<std::size_t>(
                    donor_rng.uniform_index(sig->donor_pool.size()));
                donors.push_back(&sig->donor_pool.members[pick]);
            }

            LabeledSample sample;
            sample.id = sample_id(index);
            sample.latent = apply_attributes(identity, sigs, donors);
            sample.image = generator.render(sample.latent);
            sample.labels = assignment;
            sample.group = cell.group;
            sample.provenance = "synthetic";
            out.push_back(std::move(sample));
        }
    }
    return out;
}

std::pair<SeedSet, SeedSet> make_toy_seed_sets(const ToyGeneratorSpec& spec,
                                               const std::string& attribute, int n_positive,
                                               int n_negative, std::uint64_t rng_seed) {
    spec.validate();
    const ToyAttribute& attr = spec.attribute(attribute);
    if (n_positive < 0 || n_negative < 0)
        throw ConfigError("seed counts must be non-negative");

    SeedSet positives{attribute, Polarity::positive, {}};
    for (int i = 0; i < n_positive; ++i) {
        NormalSampler rng(mix_seed(rng_seed, "toyseed.pos", static_cast<std::uint64_t>(i)));
        LayeredLatent latent = draw_latent(rng, spec.latent);
        for (int layer = attr.control_layers.lo; layer <= attr.control_layers.hi; ++layer)
            for (const int dim : attr.control_dims)
                latent.at(layer, dim) =
                    static_cast<float>(attr.shift + attr.jitter * rng.next());
        positives.members.push_back(std::move(latent));
    }

    SeedSet negatives{attribute, Polarity::negative, {}};
    for (int i = 0; i < n_negative; ++i) {
        NormalSampler rng(mix_seed(rng_seed, "toyseed.neg", static_cast<std::uint64_t>(i)));
        negatives.members.push_back(draw_latent(rng, spec.latent));
    }
    return {std::move(positives), std::move(negatives)};
}

// --- Toy spec files -----------------------------------------------------------

namespace {

constexpr const char* kToySpecFormat = "catkit-toygen";
constexpr int kToySpecVersion = 1;

} // namespace

void save_toy_spec(const ToyGeneratorSpec& spec, const std::string& path) {
    spec.validate();
    json j;
    j["format"] = kToySpecFormat;
    j["version"] = kToySpecVersion;
    j["latent"] = {{"layers", spec.latent.layers},
                   {"dims_per_layer", spec.latent.dims_per_layer}};
    j["noise"] = spec.noise;
    j["extra_features"] = spec.extra_features;
    j["feature_seed"] = spec.feature_seed;
    json attributes = json::array();
    for (const auto& a : spec.attributes)
        attributes.push_back({{"name", a.name},
                              {"control_layers", {{"lo", a.control_layers.lo},
                                                  {"hi", a.control_layers.hi}}},
                              {"control_dims", a.control_dims},
                              {"shift", a.shift},
                              {"jitter", a.jitter},
                              {"threshold", a.threshold}});
    j["attributes"] = attributes;
    atomic_write(path, j.dump(2) + "\n");
}

ToyGeneratorSpec load_toy_spec(const std::string& path) {
    try {
        const json j = json::parse(read_file(path));
        if (j.at("format").get<std::string>() != kToySpecFormat)
            throw ParseError(path + ": not a toy generator profile");
        if (j.at("version").get<int>() != kToySpecVersion)
            throw ParseError(path + ": unsupported toy generator version");
        ToyGeneratorSpec spec;
        spec.latent.layers = j.at("latent").at("layers").get<int>();
        spec.latent.dims_per_layer = j.at("latent").at("dims_per_layer").get<int>();
        spec.noise = j.at("noise").get<double>();
        spec.extra_features = j.at("extra_features").get<int>();
        spec.feature_seed = j.at("feature_seed").get<std::uint64_t>();
        for (const auto& entry : j.at("attributes")) {
            ToyAttribute a;
            a.name = entry.at("name").get<std::string>();
            a.control_layers.lo = entry.at("control_layers").at("lo").get<int>();
            a.control_layers.hi = entry.at("control_layers").at("hi").get<int>();
            a.control_dims = entry.at("control_dims").get<std::vector<int>>();
            a.shift = entry.at("shift").get<double>();
            a.jitter = entry.at("jitter").get<double>();
            a.threshold = entry.at("threshold").get<double>();
            spec.attributes.push_back(std::move(a));
        }
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// --- Dataset files ------------------------------------------------------------

namespace {

constexpr const char* kDatasetFormat = "catkit-dataset";
constexpr int kDatasetVersion = 1;

} // namespace

DatasetPaths dataset_paths(const std::string& manifest_path) {
    std::string stem = manifest_path;
    const auto dot = stem.rfind(".jsonl");
    if (dot != std::string::npos && dot == stem.size() - 6) stem.resize(dot);
    return {manifest_path, stem + ".latents.bin", stem + ".features.bin"};
}

void save_dataset(const std::vector<LabeledSample>& samples, const LatentConfig& cfg,
                  std::size_t feature_dim, std::uint64_t rng_seed,
                  const std::string& manifest_path) {
    const DatasetPaths paths = dataset_paths(manifest_path);
    const std::size_t latent_bytes =
        static_cast<std::size_t>(cfg.layers) * cfg.dims_per_layer * sizeof(float);

    std::ostringstream manifest;
    std::string latents;
    std::string features;
    latents.reserve(samples.size() * latent_bytes);

    json header;
    header["format"] = kDatasetFormat;
    header["version"] = kDatasetVersion;
    header["latent"] = {{"layers", cfg.layers}, {"dims_per_layer", cfg.dims_per_layer}};
    header["feature_dim"] = feature_dim;
    header["rng_seed"] = rng_seed;
    header["count"] = samples.size();
    manifest << header.dump() << "\n";

    for (const auto& sample : samples) {
        if (!sample.latent.same_shape(cfg))
            throw ConfigError("sample '" + sample.id + "' latent shape mismatch");
        if (sample.image.features.size() != feature_dim)
            throw ConfigError("sample '" + sample.id + "' feature dimension mismatch");

        json rec;
        rec["id"] = sample.id;
        rec["provenance"] = sample.provenance;
        rec["group"] = sample.group;
        rec["labels"] = sample.labels;
        rec["latent_offset"] = latents.size();
        rec["feature_offset"] = features.size();
        manifest << rec.dump() << "\n";

        const auto* lbytes = reinterpret_cast<const char*>(sample.latent.values().data());
        latents.append(lbytes, latent_bytes);
        const auto* fbytes = reinterpret_cast<const char*>(sample.image.features.data());
        features.append(fbytes, feature_dim * sizeof(double));
    }

    atomic_write(paths.manifest, manifest.str());
    atomic_write(paths.latents, latents);
    atomic_write(paths.features, features);
}

std::vector<LabeledSample> load_dataset(const std::string& manifest_path) {
    const DatasetPaths paths = dataset_paths(manifest_path);
    std::istringstream manifest(read_file(paths.manifest));
    const std::string latents = read_file(paths.latents);
    const std::string features = read_file(paths.features);

    std::string line;
    if (!std::getline(manifest, line))
        throw ParseError(paths.manifest + ": empty manifest");

    LatentConfig cfg;
    std::size_t feature_dim = 0;
    std::size_t count = 0;
    try {
        const json header = json::parse(line);
        if (header.at("format").get<std::string>() != kDatasetFormat)
            throw ParseError(paths.manifest + ": not a dataset manifest");
        if (header.at("version").get<int>() != kDatasetVersion)
            throw ParseError(paths.manifest + ": unsupported manifest version");
        cfg.layers = header.at("latent").at("layers").get<int>();
        cfg.dims_per_layer = header.at("latent").at("dims_per_layer").get<int>();
        cfg.rng_seed = header.at("rng_seed").get<std::uint64_t>();
        feature_dim = header.at("feature_dim").get<std::size_t>();
        count = header.at("count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ParseError(paths.manifest + ": " + e.what());
    }
    cfg.validate();

    const std::size_t latent_bytes =
        static_cast<std::size_t>(cfg.layers) * cfg.dims_per_layer * sizeof(float);
    std::vector<LabeledSample> out;
    std::size_t line_no = 1;
    while (std::getline(manifest, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            LabeledSample sample;
            sample.id = rec.at("id").get<std::string>();
            sample.provenance = rec.at("provenance").get<std::string>();
            sample.group = rec.at("group").get<int>();
            sample.labels = rec.at("labels").get<std::map<std::string, int>>();

            const auto loff = rec.at("latent_offset").get<std::size_t>();
            const auto foff = rec.at("feature_offset").get<std::size_t>();
            if (loff + latent_bytes > latents.size())
                throw ParseError(paths.latents + ": latent blob truncated");
            if (foff + feature_dim * sizeof(double) > features.size())
                throw ParseError(paths.features + ": feature blob truncated");

            sample.latent = LayeredLatent(cfg.layers, cfg.dims_per_layer);
            std::memcpy(sample.latent.values().data(), latents.data() + loff, latent_bytes);
            sample.image.features.resize(feature_dim);
            std::memcpy(sample.image.features.data(), features.data() + foff,
                        feature_dim * sizeof(double));
            out.push_back(std::move(sample));
        } catch (const json::exception& e) {
            throw ParseError(paths.manifest + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (out.size() != count)
        throw ParseError(paths.manifest + ": header declares " + std::to_string(count) +
                         " samples but " + std::to_string(out.size()) + " records follow");
    return out;
}

} // namespace cat
