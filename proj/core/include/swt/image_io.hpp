#pragma once

#include <filesystem>

#include "swt/feature_map.hpp"

namespace swt {

/// PNG samples are returned unscaled (0..255 or 0..65535) as floats, with 1,
/// 2, 3 or 4 channels as stored. `bit_depth` receives 8 or 16 when non-null.
FeatureMap read_png(const std::filesystem::path& path, int* bit_depth = nullptr);

/// Values are rounded and clamped to the bit depth's range. Supports 1-4
/// channels at 8 or 16 bits.
void write_png(const FeatureMap& image, const std::filesystem::path& path, int bit_depth = 8);

/// Portable float map ("Pf" grayscale, "PF" RGB). Rows are stored bottom-up in
/// the file and returned top-down.
FeatureMap read_pfm(const std::filesystem::path& path);
void write_pfm(const FeatureMap& image, const std::filesystem::path& path);

/// Single-channel depth in meters from .fmap, .pfm or 16/8-bit .png; PNG
/// samples are divided by `png_units_per_meter`.
FeatureMap read_depth(const std::filesystem::path& path, double png_units_per_meter = 1000.0);

/// Any raster by extension (.fmap, .pfm, .png).
FeatureMap read_raster(const std::filesystem::path& path, int* png_bit_depth = nullptr);
void write_raster(const FeatureMap& image, const std::filesystem::path& path, int png_bit_depth = 8);

} // namespace swt
