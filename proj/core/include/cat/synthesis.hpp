#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cat/discovery.hpp"
#include "cat/latent.hpp"
#include "cat/planner.hpp"

namespace cat {

/// Desk-scale stand-in for a rendered image: a fixed-length feature vector.
struct ImageVector {
    std::vector<double> features;
};

/// A generative model mapping latent codes to images. Rendering must be a
/// pure function of the latent (no hidden state), so batches can be
/// parallelized and replayed.
class Generator {
public:
    virtual ~Generator() = default;

    virtual ImageVector render(const LayeredLatent& latent) const = 0;
    virtual const LatentConfig& latent_config() const = 0;
    virtual std::size_t output_dim() const = 0;
};

/// One controlled attribute of the toy generator: its feature is the mean of
/// the latent over (control_layers x control_dims), and its ground-truth
/// label is feature > threshold.
struct ToyAttribute {
    std::string name;
    LayerRange control_layers;
    std::vector<int> control_dims; // strictly increasing
    double shift = 3.0;            // control-cell level that marks a positive
    double jitter = 0.1;           // spread of control cells in positive seeds
    double threshold = 1.5;        // label decision boundary

    void validate(const LatentConfig& cfg) const;
};

struct ToyGeneratorSpec {
    LatentConfig latent;
    std::vector<ToyAttribute> attributes;
    double noise = 0.1;     // feature noise amplitude
    int extra_features = 0; // fixed linear mixtures appended after attributes
    std::uint64_t feature_seed = 0; // keys noise and mixing weights

    const ToyAttribute& attribute(const std::string& name) const;
    bool has_attribute(const std::string& name) const;

    /// Control cells of distinct attributes must not share (layer, dim);
    /// shift > threshold > 0 keeps labels separable.
    void validate() const;
};

class ToyGenerator final : public Generator {
public:
    explicit ToyGenerator(ToyGeneratorSpec spec);

    /// features = [one per attribute, then extra_features mixtures]. Noise is
    /// keyed by (feature_seed, latent bytes), so rendering stays a pure
    /// function of the latent.
    ImageVector render(const LayeredLatent& latent) const override;
    const LatentConfig& latent_config() const override { return spec_.latent; }
    std::size_t output_dim() const override;

    const ToyGeneratorSpec& spec() const { return spec_; }

private:
    ToyGeneratorSpec spec_;
    std::vector<std::vector<double>> mixing_; // [extra_feature][layer*dim]
};

/// Ground-truth labels for a toy-rendered image: attribute a is 1 iff its
/// feature exceeds its threshold (strict).
std::map<std::string, int> oracle_annotate(const ImageVector& image,
                                           const ToyGeneratorSpec& spec);

// --- Attribute application ---------------------------------------------------

/// Copies the donor's values into the identity code at exactly the
/// signature's (layer, dim) cells; everything else is untouched.
LayeredLatent apply_attribute(const LayeredLatent& identity, const AttributeSignature& sig,
                              const LayeredLatent& donor);

/// Sequential application of several signatures. Their cell sets must be
/// pairwise disjoint, which makes the result order-independent; overlaps
/// raise ConflictError naming the first clashing cell.
LayeredLatent apply_attributes(const LayeredLatent& identity,
                               const std::vector<const AttributeSignature*>& sigs,
                               const std::vector<const LayeredLatent*>& donors);

// --- Signature registry -------------------------------------------------------

/// Signatures indexed by (label, donor-pool polarity). Assigning value 1
/// applies the positive-polarity signature, value 0 the negative one.
class SignatureRegistry {
public:
    void add(AttributeSignature sig);

    bool contains(const std::string& label, Polarity polarity) const;
    const AttributeSignature& get(const std::string& label, Polarity polarity) const;

    std::size_t size() const { return entries_.size(); }
    std::vector<std::string> labels() const;

private:
    std::map<std::pair<std::string, Polarity>, AttributeSignature> entries_;
};

// --- Batch synthesis ----------------------------------------------------------

struct LabeledSample {
    std::string id;
    LayeredLatent latent;
    ImageVector image;
    std::map<std::string, int> labels; // assigned attributes + protected
    int group = 0;
    std::string provenance; // "original" | "synthetic"
};

struct SynthesisOptions {
    std::uint64_t rng_seed = 0;
    /// Paired mode: cells that differ only in the protected group share
    /// identity seeds and donor choices, yielding counterpart pairs.
    bool paired = false;
};

/// Materializes a plan: for every cell, `count` samples whose identity codes
/// are freshly drawn, with the cell's assignment (plus the protected group)
/// applied from registry signatures. Labels come from the assignment.
/// Per-sample streams depend only on (rng_seed, cell assignment, index), so
/// output is independent of scheduling and byte-stable across reruns.
std::vector<LabeledSample> synthesize_batch(const BalancePlan& plan,
                                            const SignatureRegistry& registry,
                                            const Generator& generator,
                                            const SynthesisOptions& options);

/// Builds the discovery inputs for one toy attribute: positive seeds are
/// identity draws with control cells re-set to shift + jitter * N(0,1);
/// negative seeds are plain identity draws.
std::pair<SeedSet, SeedSet> make_toy_seed_sets(const ToyGeneratorSpec& spec,
                                               const std::string& attribute, int n_positive,
                                               int n_negative, std::uint64_t rng_seed);

/// Versioned JSON round-trip of a toy generator profile, so pipelines can
/// pin the generator alongside their other artifacts.
void save_toy_spec(const ToyGeneratorSpec& spec, const std::string& path);
ToyGeneratorSpec load_toy_spec(const std::string& path);

// --- Dataset files ------------------------------------------------------------
//
// Manifest: one JSON record per line; a header line carries the format
// version, latent shape, feature dimension and rng seed, then one line per
// sample (id, provenance, group, labels, blob offsets). Companion blobs hold
// latents (little-endian float32) and features (little-endian float64) at
// the recorded offsets. Appending preserves existing lines verbatim.

struct DatasetPaths {
    std::string manifest;
    std::string latents;
    std::string features;
};

/// Derives <stem>.latents.bin / <stem>.features.bin next to the manifest.
DatasetPaths dataset_paths(const std::string& manifest_path);

void save_dataset(const std::vector<LabeledSample>& samples, const LatentConfig& cfg,
                  std::size_t feature_dim, std::uint64_t rng_seed,
                  const std::string& manifest_path);

std::vector<LabeledSample> load_dataset(const std::string& manifest_path);

} // namespace cat
