#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "swt/feature_map.hpp"
#include "swt/geometry.hpp"

namespace swt {

/// Shape of the equator template window. Node offsets are in angle space:
/// dilation multiplies the spacing between nodes.
struct TemplateConfig {
    int m_rows = 4;
    int m_cols = 4;
    int dilation = 1;
    ErpGridSpec grid;

    /// Pixel extent of one window on the ERP grid.
    int window_rows_px() const noexcept { return m_rows * dilation; }
    int window_cols_px() const noexcept { return m_cols * dilation; }

    /// Throws ConfigError if the template does not fit the grid.
    void validate() const;
    /// validate() plus: the window pixel extent must tile the grid exactly.
    void validate_tiling() const;

    friend bool operator==(const TemplateConfig&, const TemplateConfig&) = default;
};

/// Equator template centered at (lat, lon) = (0, 0).
struct Template {
    TemplateConfig config;
    SampleGrid nodes;
    std::vector<UnitVec3> points; // sp() of each node, row-major
};

Template build_template(const TemplateConfig& cfg);

/// Rotates every template node so the template center lands on `center`.
SampleGrid transform_window(const Template& t, const AngleCoord& center);

/// Quantized per-window gather indices into an H x W grid.
/// Layout: window-row, window-col, node-row, node-col.
class IndexMap {
public:
    IndexMap() = default;
    IndexMap(const TemplateConfig& cfg, std::vector<std::uint32_t> indices,
             std::vector<AngleCoord> coords = {});

    const TemplateConfig& config() const noexcept { return cfg_; }
    const ErpGridSpec& grid() const noexcept { return cfg_.grid; }
    int window_rows() const noexcept { return n_rows_; } // nH
    int window_cols() const noexcept { return n_cols_; } // nW
    std::size_t window_count() const noexcept { return static_cast<std::size_t>(n_rows_) * n_cols_; }
    std::size_t nodes_per_window() const noexcept {
        return static_cast<std::size_t>(cfg_.m_rows) * cfg_.m_cols;
    }

    std::span<const std::uint32_t> indices() const noexcept { return indices_; }
    std::span<const std::uint32_t> window(std::size_t w) const noexcept {
        return {indices_.data() + w * nodes_per_window(), nodes_per_window()};
    }

    /// Continuous pre-quantization coordinates; empty unless requested at build time.
    bool has_coords() const noexcept { return !coords_.empty(); }
    std::span<const AngleCoord> coords() const noexcept { return coords_; }

    friend bool operator==(const IndexMap&, const IndexMap&) = default;

private:
    TemplateConfig cfg_;
    int n_rows_ = 0;
    int n_cols_ = 0;
    std::vector<std::uint32_t> indices_;
    std::vector<AngleCoord> coords_;
};

struct BuildOptions {
    int threads = 1;
    bool keep_coords = false;
};

/// Operation counts of one map build.
struct BuildStats {
    std::size_t window_transforms = 0;
    std::size_t rolls = 0;
};

/// Continuous-pixel center of window (wr, wc) expressed as an angle.
AngleCoord window_center(const TemplateConfig& cfg, int wr, int wc);

/// Nearest-pixel quantization: round half up on both axes, rows clamped,
/// columns wrapped. Values within 1e-9 px of a half-integer are snapped onto
/// it first so that integer longitude shifts commute with rounding.
std::uint32_t quantize(const AngleCoord& a, const ErpGridSpec& grid) noexcept;

/// One rotation per window (nH * nW transforms).
IndexMap build_index_map_naive(const TemplateConfig& cfg, const BuildOptions& opts = {},
                               BuildStats* stats = nullptr);

/// Rotates only the nH windows of column 0 and derives every other column by
/// an integer longitude roll. Bit-identical to the naive map.
IndexMap build_index_map_fast(const TemplateConfig& cfg, const BuildOptions& opts = {},
                              BuildStats* stats = nullptr);

/// Undeformed regular lattice: node (i, j) of each window reads pixel
/// (r0 + i * dilation, c0 + j * dilation). Disables the transform.
IndexMap identity_index_map(const TemplateConfig& cfg);

/// Shifts every stored column index by `pixels` modulo W. Window slots keep
/// their positions; only the gathered pixels move.
IndexMap roll_lon(const IndexMap& map, long long pixels);

enum class SampleMode { nearest, bilinear };

/// Gathers `f` through the map. Output has one window per map window with
/// m_rows x m_cols nodes. Bilinear mode uses the stored continuous coordinates
/// (regenerated when the map does not carry them).
WindowSet sample(const FeatureMap& f, const IndexMap& map, SampleMode mode = SampleMode::nearest,
                 int threads = 1);

/// SWTM index-map file.
std::vector<std::uint8_t> encode_index_map(const IndexMap& map, bool include_coords);
IndexMap decode_index_map(std::span<const std::uint8_t> bytes);
void write_index_map(const IndexMap& map, const std::filesystem::path& path, bool include_coords = false);
IndexMap read_index_map(const std::filesystem::path& path);

} // namespace swt
