#include "swt/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swt/error.hpp"
#include "swt/parallel.hpp"

namespace swt {

namespace {

constexpr double kSnapTolerancePx = 1e-9;

std::string dims(int a, int b) { return std::to_string(a) + "x" + std::to_string(b); }

// Round half up after snapping near-ties onto the exact half-integer.
long long round_pixel(double x) noexcept {
    const double twice = std::round(2.0 * x);
    if (std::abs(2.0 * x - twice) < 2.0 * kSnapTolerancePx) {
        x = twice / 2.0;
    }
    return static_cast<long long>(std::floor(x + 0.5));
}

long long wrap_index(long long v, long long n) noexcept {
    const long long r = v % n;
    return r < 0 ? r + n : r;
}

struct QuantizedNode {
    std::uint32_t row_offset; // row * W
    std::uint32_t col;
};

QuantizedNode quantize_parts(const AngleCoord& a, const ErpGridSpec& grid) noexcept {
    const PixelCoord p = angle_to_pixel(a, grid);
    long long row = round_pixel(p.row);
    row = row < 0 ? 0 : (row >= grid.height ? grid.height - 1 : row);
    const long long col = wrap_index(round_pixel(p.col), grid.width);
    return {static_cast<std::uint32_t>(row * grid.width), static_cast<std::uint32_t>(col)};
}

} // namespace

void TemplateConfig::validate() const {
    if (m_rows < 1 || m_cols < 1) {
        throw ConfigError("template must have at least one node per side, got " + dims(m_rows, m_cols));
    }
    if (dilation < 1) {
        throw ConfigError("dilation must be >= 1, got " + std::to_string(dilation));
    }
    if (grid.height < 1 || grid.width < 2) {
        throw ConfigError("template grid is not a valid ERP grid");
    }
    if (window_rows_px() > grid.height || window_cols_px() > grid.width) {
        throw ConfigError("template extent " + dims(window_rows_px(), window_cols_px()) +
                          " exceeds grid " + dims(grid.height, grid.width));
    }
    const std::size_t max_index = grid.pixel_count();
    if (max_index > std::numeric_limits<std::uint32_t>::max()) {
        throw ConfigError("grid too large for 32-bit indices");
    }
}

void TemplateConfig::validate_tiling() const {
    validate();
    if (grid.height % window_rows_px() != 0 || grid.width % window_cols_px() != 0) {
        throw ConfigError("window extent " + dims(window_rows_px(), window_cols_px()) +
                          " does not divide grid " + dims(grid.height, grid.width));
    }
}

Template build_template(const TemplateConfig& cfg) {
    cfg.validate();
    Template t{cfg, SampleGrid(cfg.m_rows, cfg.m_cols), {}};
    const double dlat = cfg.grid.lat_step() * cfg.dilation;
    const double dlon = cfg.grid.lon_step() * cfg.dilation;
    const double half_r = (cfg.m_rows - 1) / 2.0;
    const double half_c = (cfg.m_cols - 1) / 2.0;
    t.points.reserve(t.nodes.coords.size());
    for (int i = 0; i < cfg.m_rows; ++i) {
        for (int j = 0; j < cfg.m_cols; ++j) {
            // Row 0 is the northernmost node, matching ERP row order.
            const AngleCoord node{-(i - half_r) * dlat, (j - half_c) * dlon};
            t.nodes.at(i, j) = node;
            t.points.push_back(sp(node));
        }
    }
    return t;
}

SampleGrid transform_window(const Template& t, const AngleCoord& center) {
    const RotationMatrix r = rotation_for(center);
    SampleGrid out(t.nodes.rows, t.nodes.cols);
    for (std::size_t n = 0; n < t.points.size(); ++n) {
        out.coords[n] = isp(r.apply(t.points[n]));
    }
    return out;
}

IndexMap::IndexMap(const TemplateConfig& cfg, std::vector<std::uint32_t> indices,
                   std::vector<AngleCoord> coords)
    : cfg_(cfg), indices_(std::move(indices)), coords_(std::move(coords)) {
    cfg_.validate_tiling();
    n_rows_ = cfg_.grid.height / cfg_.window_rows_px();
    n_cols_ = cfg_.grid.width / cfg_.window_cols_px();
    const std::size_t expected = window_count() * nodes_per_window();
    if (indices_.size() != expected) {
        throw ShapeError("index map holds " + std::to_string(indices_.size()) + " indices, expected " +
                         std::to_string(expected));
    }
    if (!coords_.empty() && coords_.size() != expected) {
        throw ShapeError("index map coordinate sidecar has the wrong length");
    }
    const std::size_t limit = cfg_.grid.pixel_count();
    for (std::uint32_t idx : indices_) {
        if (idx >= limit) {
            throw ShapeError("index " + std::to_string(idx) + " out of range for " +
                             dims(cfg_.grid.height, cfg_.grid.width) + " grid");
        }
    }
}

AngleCoord window_center(const TemplateConfig& cfg, int wr, int wc) {
    const int rows_px = cfg.window_rows_px();
    const int cols_px = cfg.window_cols_px();
    return pixel_to_angle(wr * rows_px + (rows_px - 1) / 2.0, wc * cols_px + (cols_px - 1) / 2.0,
                          cfg.grid);
}

std::uint32_t quantize(const AngleCoord& a, const ErpGridSpec& grid) noexcept {
    const QuantizedNode q = quantize_parts(a, grid);
    return q.row_offset + q.col;
}

IndexMap build_index_map_naive(const TemplateConfig& cfg, const BuildOptions& opts, BuildStats* stats) {
    cfg.validate_tiling();
    const Template t = build_template(cfg);
    const int n_rows = cfg.grid.height / cfg.window_rows_px();
    const int n_cols = cfg.grid.width / cfg.window_cols_px();
    const std::size_t windows = static_cast<std::size_t>(n_rows) * n_cols;
    const std::size_t nodes = t.points.size();

    std::vector<std::uint32_t> indices(windows * nodes);
    std::vector<AngleCoord> coords(opts.keep_coords ? windows * nodes : 0);
    parallel_for(windows, opts.threads, [&](std::size_t w) {
        const int wr = static_cast<int>(w / n_cols);
        const int wc = static_cast<int>(w % n_cols);
        const SampleGrid g = transform_window(t, window_center(cfg, wr, wc));
        for (std::size_t n = 0; n < nodes; ++n) {
            indices[w * nodes + n] = quantize(g.coords[n], cfg.grid);
            if (opts.keep_coords) {
                coords[w * nodes + n] = g.coords[n];
            }
        }
    });
    if (stats != nullptr) {
        *stats = {windows, 0};
    }
    return {cfg, std::move(indices), std::move(coords)};
}

IndexMap build_index_map_fast(const TemplateConfig& cfg, const BuildOptions& opts, BuildStats* stats) {
    cfg.validate_tiling();
    const Template t = build_template(cfg);
    const int n_rows = cfg.grid.height / cfg.window_rows_px();
    const int n_cols = cfg.grid.width / cfg.window_cols_px();
    const std::size_t nodes = t.points.size();
    const auto width = static_cast<std::uint32_t>(cfg.grid.width);
    const auto shift_px = static_cast<std::uint32_t>(cfg.window_cols_px());
    const double shift_lon = cfg.window_cols_px() * cfg.grid.lon_step();

    std::vector<std::uint32_t> indices(static_cast<std::size_t>(n_rows) * n_cols * nodes);
    std::vector<AngleCoord> coords(opts.keep_coords ? indices.size() : 0);
    parallel_for(static_cast<std::size_t>(n_rows), opts.threads, [&](std::size_t wr) {
        const SampleGrid g = transform_window(t, window_center(cfg, static_cast<int>(wr), 0));
        std::vector<QuantizedNode> ref(nodes);
        for (std::size_t n = 0; n < nodes; ++n) {
            ref[n] = quantize_parts(g.coords[n], cfg.grid);
        }
        // Yaw by a whole window width is a roll of the quantized columns.
        for (int wc = 0; wc < n_cols; ++wc) {
            const std::size_t base = (wr * n_cols + wc) * nodes;
            const std::uint32_t shift = static_cast<std::uint32_t>(wc) * shift_px;
            for (std::size_t n = 0; n < nodes; ++n) {
                std::uint32_t col = ref[n].col + shift;
                col = col >= width ? col % width : col;
                indices[base + n] = ref[n].row_offset + col;
            }
            if (opts.keep_coords) {
                for (std::size_t n = 0; n < nodes; ++n) {
                    coords[base + n] = {g.coords[n].lat, wrap_lon(g.coords[n].lon + wc * shift_lon)};
                }
            }
        }
    });
    if (stats != nullptr) {
        *stats = {static_cast<std::size_t>(n_rows), static_cast<std::size_t>(n_cols - 1)};
    }
    return {cfg, std::move(indices), std::move(coords)};
}

IndexMap identity_index_map(const TemplateConfig& cfg) {
    cfg.validate_tiling();
    const int n_rows = cfg.grid.height / cfg.window_rows_px();
    const int n_cols = cfg.grid.width / cfg.window_cols_px();
    std::vector<std::uint32_t> indices;
    indices.reserve(static_cast<std::size_t>(n_rows) * n_cols * cfg.m_rows * cfg.m_cols);
    for (int wr = 0; wr < n_rows; ++wr) {
        for (int wc = 0; wc < n_cols; ++wc) {
            for (int i = 0; i < cfg.m_rows; ++i) {
                for (int j = 0; j < cfg.m_cols; ++j) {
                    const long long row = wr * cfg.window_rows_px() + i * cfg.dilation;
                    const long long col = wc * cfg.window_cols_px() + j * cfg.dilation;
                    indices.push_back(static_cast<std::uint32_t>(row * cfg.grid.width + col));
                }
            }
        }
    }
    return {cfg, std::move(indices)};
}

IndexMap roll_lon(const IndexMap& map, long long pixels) {
    const long long width = map.grid().width;
    const long long shift = wrap_index(pixels, width);
    std::vector<std::uint32_t> indices(map.indices().begin(), map.indices().end());
    for (auto& idx : indices) {
        const long long row = idx / width;
        const long long col = (idx % width + shift) % width;
        idx = static_cast<std::uint32_t>(row * width + col);
    }
    std::vector<AngleCoord> coords(map.coords().begin(), map.coords().end());
    const double dlon = static_cast<double>(shift) * map.grid().lon_step();
    for (auto& c : coords) {
        c.lon = wrap_lon(c.lon + dlon);
    }
    return {map.config(), std::move(indices), std::move(coords)};
}

WindowSet sample(const FeatureMap& f, const IndexMap& map, SampleMode mode, int threads) {
    const ErpGridSpec& grid = map.grid();
    if (f.height() != grid.height || f.width() != grid.width) {
        throw ShapeError("feature map " + dims(f.height(), f.width()) + " does not match index map grid " +
                         dims(grid.height, grid.width));
    }
    const TemplateConfig& cfg = map.config();
    const int c = f.channels();
    WindowSet out(map.window_rows(), map.window_cols(), cfg.m_rows, cfg.m_cols, c);
    const std::size_t nodes = map.nodes_per_window();

    if (mode == SampleMode::nearest) {
        parallel_for(map.window_count(), threads, [&](std::size_t w) {
            const auto idx = map.window(w);
            float* dst = out.window(w).data();
            for (std::size_t n = 0; n < nodes; ++n) {
                const auto px = f.pixel(idx[n]);
                std::copy(px.begin(), px.end(), dst + n * c);
            }
        });
        return out;
    }

    IndexMap regenerated;
    const IndexMap* with_coords = &map;
    if (!map.has_coords()) {
        regenerated = build_index_map_fast(cfg, {threads, true});
        with_coords = &regenerated;
    }
    const auto coords = with_coords->coords();
    const long long h = grid.height;
    const long long wdt = grid.width;
    parallel_for(map.window_count(), threads, [&](std::size_t w) {
        float* dst = out.window(w).data();
        std::vector<double> acc(static_cast<std::size_t>(c));
        for (std::size_t n = 0; n < nodes; ++n) {
            const PixelCoord p = angle_to_pixel(coords[w * nodes + n], grid);
            const double r0f = std::floor(p.row);
            const double c0f = std::floor(p.col);
            const double fr = p.row - r0f;
            const double fc = p.col - c0f;
            const auto r0 = static_cast<long long>(r0f);
            const auto c0 = static_cast<long long>(c0f);
            const long long rows[2] = {std::clamp(r0, 0LL, h - 1), std::clamp(r0 + 1, 0LL, h - 1)};
            const long long cols[2] = {wrap_index(c0, wdt), wrap_index(c0 + 1, wdt)};
            const double wr[2] = {1.0 - fr, fr};
            const double wc[2] = {1.0 - fc, fc};
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    const double weight = wr[a] * wc[b];
                    const auto px = f.pixel(static_cast<std::size_t>(rows[a] * wdt + cols[b]));
                    for (int ch = 0; ch < c; ++ch) {
                        acc[ch] += weight * px[ch];
                    }
                }
            }
            for (int ch = 0; ch < c; ++ch) {
                dst[n * c + ch] = static_cast<float>(acc[ch]);
            }
        }
    });
    return out;
}

} // namespace swt
