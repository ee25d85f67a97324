#include "cat/registry.hpp"

#include <algorithm>
#include <map>

#include "cat/errors.hpp"

namespace cat {

LayerRange layers_for_resolution(int resolution) {
    switch (resolution) {
        case 4: return {0, 1};
        case 8: return {2, 3};
        case 16: return {4, 5};
        case 32: return {6, 7};
        case 64: return {8, 9};
        case 128: return {10, 11};
        case 256: return {12, 13};
        default:
            throw ConfigError("no layer mapping for resolution " +
                              std::to_string(resolution) + "^2");
    }
}

LayerRange layers_for_resolution_band(int lo_resolution, int hi_resolution) {
    const LayerRange lo = layers_for_resolution(lo_resolution);
    const LayerRange hi = layers_for_resolution(hi_resolution);
    if (lo.lo > hi.hi)
        throw ConfigError("resolution band is inverted");
    return {lo.lo, hi.hi};
}

namespace {

const std::map<std::string, LayerRange>& attribute_bands() {
    // Face shape at 8^2; fine face shape at 16^2; hair color at 32^2-64^2;
    // skin color at 128^2-256^2; masculinity/femininity at 8^2-16^2.
    static const std::map<std::string, LayerRange> bands = [] {
        std::map<std::string, LayerRange> m;
        const LayerRange face_shape = layers_for_resolution(8);
        const LayerRange fine_face_shape = layers_for_resolution(16);
        const LayerRange hair_color = layers_for_resolution_band(32, 64);
        const LayerRange skin_color = layers_for_resolution_band(128, 256);
        const LayerRange sex_band = layers_for_resolution_band(8, 16);

        for (const char* a : {"Chubby", "Big_Nose", "Pointy_Nose", "High_Cheekbones",
                              "Double_Chin"})
            m.emplace(a, face_shape);
        for (const char* a : {"Bags_Under_Eyes", "Wavy_Hair", "Straight_Hair"})
            m.emplace(a, fine_face_shape);
        for (const char* a : {"Black_Hair", "Blond_Hair", "Brown_Hair", "Gray_Hair"})
            m.emplace(a, hair_color);
        m.emplace("Pale_Skin", skin_color);
        for (const auto& list : {masculinity_attributes(), femininity_attributes()})
            for (const auto& a : list)
                m.emplace(a, sex_band);
        m.emplace("Male", sex_band);
        return m;
    }();
    return bands;
}

} // namespace

bool has_default_layer_band(const std::string& attribute) {
    return attribute_bands().count(attribute) != 0;
}

LayerRange default_layer_band(const std::string& attribute) {
    const auto& bands = attribute_bands();
    const auto it = bands.find(attribute);
    if (it == bands.end())
        throw ConfigError("no default layer band for attribute '" + attribute +
                          "'; pass an explicit layer range");
    return it->second;
}

const std::vector<std::vector<std::string>>& exclusive_families() {
    static const std::vector<std::vector<std::string>> families = {
        {"Black_Hair", "Blond_Hair", "Brown_Hair", "Gray_Hair"},
        {"Straight_Hair", "Wavy_Hair"},
    };
    return families;
}

bool same_exclusive_family(const std::string& a, const std::string& b) {
    if (a == b) return false;
    for (const auto& family : exclusive_families()) {
        const bool has_a = std::find(family.begin(), family.end(), a) != family.end();
        const bool has_b = std::find(family.begin(), family.end(), b) != family.end();
        if (has_a && has_b) return true;
    }
    return false;
}

const std::vector<std::string>& masculinity_attributes() {
    static const std::vector<std::string> list = {
        "5_o_Clock_Shadow", "Bald",      "Bushy_Eyebrows",   "Goatee",
        "Mustache",         "Sideburns", "Receding_Hairline", "Wearing_Necktie",
    };
    return list;
}

const std::vector<std::string>& femininity_attributes() {
    static const std::vector<std::string> list = {
        "Arched_Eyebrows",  "Attractive",      "Heavy_Makeup",     "No_Beard",
        "Oval_Face",        "Rosy_Cheeks",     "Wearing_Earrings", "Wearing_Lipstick",
        "Wearing_Necklace",
    };
    return list;
}

} // namespace cat
