#include "swt/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "byte_io.hpp"
#include "swt/error.hpp"

namespace swt {

namespace {

constexpr std::uint16_t kFmapVersion = 1;

void check_dims(int h, int w, int c) {
    if (h < 1 || w < 1 || c < 1) {
        throw ShapeError("feature map dimensions must be positive, got " + std::to_string(h) + "x" +
                         std::to_string(w) + "x" + std::to_string(c));
    }
}

} // namespace

FeatureMap::FeatureMap(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
    check_dims(height, width, channels);
    values_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

FeatureMap::FeatureMap(int height, int width, int channels, std::vector<float> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
    check_dims(height, width, channels);
    if (values_.size() != static_cast<std::size_t>(height) * width * channels) {
        throw ShapeError("feature map value count " + std::to_string(values_.size()) +
                         " does not match " + std::to_string(height) + "x" + std::to_string(width) +
                         "x" + std::to_string(channels));
    }
}

bool FeatureMap::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); });
}

WindowSet::WindowSet(int n_rows_, int n_cols_, int m_rows_, int m_cols_, int channels_)
    : n_rows(n_rows_), n_cols(n_cols_), m_rows(m_rows_), m_cols(m_cols_), channels(channels_) {
    values.assign(window_count() * window_stride(), 0.0f);
}

WindowSet partition_windows(const FeatureMap& f, int m_rows, int m_cols) {
    if (m_rows < 1 || m_cols < 1 || f.height() % m_rows != 0 || f.width() % m_cols != 0) {
        throw ShapeError("window " + std::to_string(m_rows) + "x" + std::to_string(m_cols) +
                         " does not tile a " + std::to_string(f.height()) + "x" +
                         std::to_string(f.width()) + " map");
    }
    const int c = f.channels();
    WindowSet ws(f.height() / m_rows, f.width() / m_cols, m_rows, m_cols, c);
    auto src = f.values();
    std::size_t w = 0;
    for (int wr = 0; wr < ws.n_rows; ++wr) {
        for (int wc = 0; wc < ws.n_cols; ++wc, ++w) {
            float* dst = ws.window(w).data();
            for (int i = 0; i < m_rows; ++i) {
                const std::size_t row_off =
                    (static_cast<std::size_t>(wr * m_rows + i) * f.width() + wc * m_cols) * c;
                std::copy_n(src.data() + row_off, static_cast<std::size_t>(m_cols) * c,
                            dst + static_cast<std::size_t>(i) * m_cols * c);
            }
        }
    }
    return ws;
}

FeatureMap merge_windows(const WindowSet& ws) {
    if (ws.n_rows < 1 || ws.n_cols < 1 || ws.m_rows < 1 || ws.m_cols < 1 || ws.channels < 1 ||
        ws.values.size() != ws.window_count() * ws.window_stride()) {
        throw ShapeError("inconsistent window set dimensions");
    }
    const int c = ws.channels;
    FeatureMap f(ws.n_rows * ws.m_rows, ws.n_cols * ws.m_cols, c);
    auto dst = f.values();
    std::size_t w = 0;
    for (int wr = 0; wr < ws.n_rows; ++wr) {
        for (int wc = 0; wc < ws.n_cols; ++wc, ++w) {
            const float* src = ws.window(w).data();
            for (int i = 0; i < ws.m_rows; ++i) {
                const std::size_t row_off =
                    (static_cast<std::size_t>(wr * ws.m_rows + i) * f.width() + wc * ws.m_cols) * c;
                std::copy_n(src + static_cast<std::size_t>(i) * ws.m_cols * c,
                            static_cast<std::size_t>(ws.m_cols) * c, dst.data() + row_off);
            }
        }
    }
    return f;
}

std::vector<std::uint8_t> encode_fmap(const FeatureMap& f) {
    detail::ByteWriter out;
    out.reserve(18 + f.size() * 4);
    out.magic("FMAP");
    out.u16(kFmapVersion);
    out.u32(static_cast<std::uint32_t>(f.height()));
    out.u32(static_cast<std::uint32_t>(f.width()));
    out.u32(static_cast<std::uint32_t>(f.channels()));
    for (float v : f.values()) {
        out.f32(v);
    }
    return std::move(out.bytes());
}

FeatureMap decode_fmap(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes, "FMAP");
    in.expect_magic("FMAP");
    const auto version = in.u16();
    if (version != kFmapVersion) {
        throw FormatError("FMAP: unsupported version " + std::to_string(version));
    }
    const auto h = in.u32();
    const auto w = in.u32();
    const auto c = in.u32();
    constexpr std::uint32_t kMaxDim = 1u << 20;
    if (h == 0 || w == 0 || c == 0 || h > kMaxDim || w > kMaxDim || c > kMaxDim) {
        throw FormatError("FMAP: invalid dimensions");
    }
    const std::size_t count = static_cast<std::size_t>(h) * w * c;
    if (count > in.remaining() / 4) {
        throw FormatError("FMAP: truncated input");
    }
    std::vector<float> values(count);
    for (auto& v : values) {
        v = in.f32();
    }
    if (in.remaining() != 0) {
        throw FormatError("FMAP: trailing bytes after payload");
    }
    return {static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(values)};
}

void write_fmap(const FeatureMap& f, const std::filesystem::path& path) {
    detail::write_file(path, encode_fmap(f));
}

FeatureMap read_fmap(const std::filesystem::path& path) {
    return decode_fmap(detail::read_file(path));
}

} // namespace swt
