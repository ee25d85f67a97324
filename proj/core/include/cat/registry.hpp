#pragma once

#include <string>
#include <vector>

#include "cat/latent.hpp"

namespace cat {

/// Layer indices controlling one spatial resolution in the default 14-layer
/// 512-dim profile: 4^2 -> layers 0-1, 8^2 -> 2-3, 16^2 -> 4-5, 32^2 -> 6-7,
/// 64^2 -> 8-9, 128^2 -> 10-11, 256^2 -> 12-13.
LayerRange layers_for_resolution(int resolution);

/// Layers for a resolution band [lo_resolution, hi_resolution].
LayerRange layers_for_resolution_band(int lo_resolution, int hi_resolution);

/// Default layer band for a named CelebA attribute: face-shape attributes
/// edit 8^2, fine face shape 16^2, hair color 32^2-64^2, skin color
/// 128^2-256^2, masculinity/femininity attributes 8^2-16^2. Layers 0-1 (4^2)
/// are reserved for identity and never assigned.
LayerRange default_layer_band(const std::string& attribute);
bool has_default_layer_band(const std::string& attribute);

/// Attribute groups of which at most one member can be positive per sample
/// (hair colors; hair texture).
const std::vector<std::vector<std::string>>& exclusive_families();

/// True if `a` and `b` belong to one exclusive family.
bool same_exclusive_family(const std::string& a, const std::string& b);

/// Sex-correlated attribute lists used for the taxonomy in the attribute
/// study. Names follow the CelebA annotation header.
const std::vector<std::string>& masculinity_attributes();
const std::vector<std::string>& femininity_attributes();

} // namespace cat
