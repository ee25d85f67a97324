#include "cat/latent.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "cat/io_util.hpp"
#include "cat/rng.hpp"

namespace cat {

void LatentConfig::validate() const {
    if (layers < 1 || dims_per_layer < 1) {
        std::ostringstream msg;
        msg << "latent config requires layers >= 1 and dims_per_layer >= 1, got ("
            << layers << ", " << dims_per_layer << ")";
        throw ConfigError(msg.str());
    }
}

void LayeredLatent::check_finite() const {
    for (float v : values_) {
        if (!std::isfinite(v)) {
            throw ConfigError("latent contains a non-finite entry");
        }
    }
}

const char* to_string(Polarity p) {
    return p == Polarity::positive ? "positive" : "negative";
}

Polarity polarity_from_string(const std::string& s) {
    if (s == "positive") return Polarity::positive;
    if (s == "negative") return Polarity::negative;
    throw ParseError("unknown polarity: '" + s + "'");
}

void SeedSet::validate() const {
    if (members.empty()) {
        throw InsufficientSeedsError("seed set '" + label + "' has no members");
    }
    for (const auto& m : members) {
        if (!m.same_shape(members.front())) {
            throw ConfigError("seed set '" + label + "' mixes latent shapes");
        }
    }
}

void LayerRange::validate(int total_layers) const {
    if (lo < 0 || hi < lo || hi >= total_layers) {
        std::ostringstream msg;
        msg << "layer range [" << lo << ", " << hi << "] invalid for " << total_layers
            << " layers";
        throw IndexError(msg.str());
    }
}

SeedSet sample_identity_seeds(int n, const LatentConfig& cfg) {
    cfg.validate();
    if (n < 1) {
        throw EmptyRequestError("requested " + std::to_string(n) + " identity seeds");
    }
    NormalSampler rng(cfg.rng_seed);
    SeedSet set;
    set.label = "identity";
    set.polarity = Polarity::positive;
    set.members.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        LayeredLatent latent(cfg.layers, cfg.dims_per_layer);
        for (float& v : latent.values()) {
            v = static_cast<float>(rng.next());
        }
        set.members.push_back(std::move(latent));
    }
    return set;
}

LayeredLatent latent_delta(const LayeredLatent& a, const LayeredLatent& b) {
    if (!a.same_shape(b)) {
        throw ConfigError("latent_delta: shape mismatch");
    }
    LayeredLatent out(a.layers(), a.dims_per_layer());
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        ov[i] = std::fabs(av[i] - bv[i]);
    }
    return out;
}

// --- container files ------------------------------------------------------

namespace {

constexpr char kBinaryMagic[8] = {'C', 'A', 'T', 'S', 'E', 'E', 'D', '1'};

void append_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

void append_u64(std::string& out, std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

class ByteReader {
public:
    ByteReader(const std::string& data, const std::string& path)
        : data_(data), path_(path) {}

    void read(void* out, std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw ParseError("truncated seed-set file: " + path_);
        }
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
    }

    std::uint32_t u32() {
        std::uint32_t v;
        read(&v, 4);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        read(&v, 8);
        return v;
    }
    std::string bytes(std::size_t n) {
        std::string s(n, '\0');
        read(s.data(), n);
        return s;
    }
    bool exhausted() const { return pos_ == data_.size(); }

private:
    const std::string& data_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace

void save_seed_set(const SeedSet& set, const std::string& path) {
    set.validate();
    const int layers = set.members.front().layers();
    const int dims = set.members.front().dims_per_layer();

    std::string out;
    out.append(kBinaryMagic, sizeof(kBinaryMagic));
    append_u32(out, static_cast<std::uint32_t>(set.label.size()));
    out += set.label;
    out.push_back(set.polarity == Polarity::positive ? 'P' : 'N');
    append_u32(out, static_cast<std::uint32_t>(layers));
    append_u32(out, static_cast<std::uint32_t>(dims));
    append_u64(out, set.members.size());
    for (const auto& m : set.members) {
        const auto& v = m.values();
        out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
    }
    atomic_write(path, out);
}

SeedSet load_seed_set(const std::string& path) {
    const std::string data = read_file(path);
    ByteReader in(data, path);

    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, kBinaryMagic, 8) != 0) {
        throw ParseError("not a seed-set file (bad magic): " + path);
    }
    SeedSet set;
    set.label = in.bytes(in.u32());
    char pol;
    in.read(&pol, 1);
    if (pol == 'P') {
        set.polarity = Polarity::positive;
    } else if (pol == 'N') {
        set.polarity = Polarity::negative;
    } else {
        throw ParseError("bad polarity byte in " + path);
    }
    const auto layers = static_cast<int>(in.u32());
    const auto dims = static_cast<int>(in.u32());
    if (layers < 1 || dims < 1) {
        throw ParseError("bad shape in seed-set file: " + path);
    }
    const std::uint64_t count = in.u64();
    set.members.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        LayeredLatent latent(layers, dims);
        in.read(latent.values().data(), latent.values().size() * sizeof(float));
        set.members.push_back(std::move(latent));
    }
    if (!in.exhausted()) {
        throw ParseError("trailing bytes in seed-set file: " + path);
    }
    set.validate();
    return set;
}

void save_seed_set_text(const SeedSet& set, const std::string& path) {
    set.validate();
    const int layers = set.members.front().layers();
    const int dims = set.members.front().dims_per_layer();

    std::ostringstream out;
    out << "# catseed text v1\n";
    out << "label " << set.label << "\n";
    out << "polarity " << to_string(set.polarity) << "\n";
    out << "layers " << layers << "\n";
    out << "dims " << dims << "\n";
    out << "count " << set.members.size() << "\n";
    for (const auto& m : set.members) {
        for (int r = 0; r < layers; ++r) {
            if (r > 0) out << " | ";
            const auto row = m.layer(r);
            for (int l = 0; l < dims; ++l) {
                if (l > 0) out << ' ';
                out << format_float(row[l]);
            }
        }
        out << "\n";
    }
    atomic_write(path, out.str());
}

SeedSet load_seed_set_text(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    int lineno = 0;

    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) {
            throw ParseError(path + ": unexpected end of file");
        }
        ++lineno;
        return line;
    };
    auto field = [&](const std::string& key) {
        next_line();
        if (line.rfind(key + " ", 0) != 0) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected '" +
                             key + "' field");
        }
        return line.substr(key.size() + 1);
    };

    next_line();
    if (line != "# catseed text v1") {
        throw ParseError(path + ":1: missing catseed header");
    }
    SeedSet set;
    set.label = field("label");
    set.polarity = polarity_from_string(field("polarity"));
    const int layers = std::stoi(field("layers"));
    const int dims = std::stoi(field("dims"));
    const long count = std::stol(field("count"));
    if (layers < 1 || dims < 1 || count < 1) {
        throw ParseError(path + ": bad shape or count");
    }

    for (long i = 0; i < count; ++i) {
        next_line();
        LayeredLatent latent(layers, dims);
        std::istringstream row(line);
        std::string token;
        for (int r = 0; r < layers; ++r) {
            if (r > 0) {
                if (!(row >> token) || token != "|") {
                    throw ParseError(path + ":" + std::to_string(lineno) +
                                     ": expected layer delimiter '|'");
                }
            }
            for (int l = 0; l < dims; ++l) {
                if (!(row >> token)) {
                    throw ParseError(path + ":" + std::to_string(lineno) +
                                     ": record too short");
                }
                try {
                    latent.at(r, l) = std::stof(token);
                } catch (const std::exception&) {
                    throw ParseError(path + ":" + std::to_string(lineno) +
                                     ": bad float '" + token + "'");
                }
            }
        }
        if (row >> token) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": record too long");
        }
        set.members.push_back(std::move(latent));
    }
    set.validate();
    return set;
}

std::uint64_t seed_set_fingerprint(const SeedSet& set) {
    set.validate();
    std::uint64_t h = fnv1a(set.label);
    h = mix_seed(h, set.polarity == Polarity::positive ? 1 : 0);
    h = mix_seed(h, static_cast<std::uint64_t>(set.members.front().layers()),
                 static_cast<std::uint64_t>(set.members.front().dims_per_layer()));
    for (const auto& m : set.members) {
        h = mix_seed(h, fnv1a(m.values().data(), m.values().size() * sizeof(float)));
    }
    return h;
}

} // namespace cat
