#include <string>

#include "byte_io.hpp"
#include "swt/error.hpp"
#include "swt/transform.hpp"

namespace swt {

namespace {

constexpr std::uint16_t kSwtmVersion = 1;

} // namespace

std::vector<std::uint8_t> encode_index_map(const IndexMap& map, bool include_coords) {
    if (include_coords && !map.has_coords()) {
        throw ConfigError("SWTM: coordinate block requested but the map carries no coordinates");
    }
    const TemplateConfig& cfg = map.config();
    detail::ByteWriter out;
    out.reserve(35 + map.indices().size() * (include_coords ? 20 : 4));
    out.magic("SWTM");
    out.u16(kSwtmVersion);
    out.u32(static_cast<std::uint32_t>(cfg.grid.height));
    out.u32(static_cast<std::uint32_t>(cfg.grid.width));
    out.u32(static_cast<std::uint32_t>(map.window_rows()));
    out.u32(static_cast<std::uint32_t>(map.window_cols()));
    out.u32(static_cast<std::uint32_t>(cfg.m_rows));
    out.u32(static_cast<std::uint32_t>(cfg.m_cols));
    out.u32(static_cast<std::uint32_t>(cfg.dilation));
    out.u8(include_coords ? 1 : 0);
    for (std::uint32_t idx : map.indices()) {
        out.u32(idx);
    }
    if (include_coords) {
        for (const AngleCoord& a : map.coords()) {
            out.f64(a.lat);
            out.f64(a.lon);
        }
    }
    return std::move(out.bytes());
}

IndexMap decode_index_map(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes, "SWTM");
    in.expect_magic("SWTM");
    const auto version = in.u16();
    if (version != kSwtmVersion) {
        throw FormatError("SWTM: unsupported version " + std::to_string(version));
    }
    const auto h = in.u32();
    const auto w = in.u32();
    const auto n_rows = in.u32();
    const auto n_cols = in.u32();
    const auto m_rows = in.u32();
    const auto m_cols = in.u32();
    const auto dilation = in.u32();
    const auto flag = in.u8();
    constexpr std::uint32_t kMaxDim = 1u << 20;
    for (auto v : {h, w, n_rows, n_cols, m_rows, m_cols, dilation}) {
        if (v == 0 || v > kMaxDim) {
            throw FormatError("SWTM: invalid header field");
        }
    }
    if (flag > 1) {
        throw FormatError("SWTM: invalid coordinate flag");
    }
    TemplateConfig cfg;
    try {
        cfg = {static_cast<int>(m_rows), static_cast<int>(m_cols), static_cast<int>(dilation),
               ErpGridSpec(static_cast<int>(h), static_cast<int>(w))};
        cfg.validate_tiling();
    } catch (const Error& e) {
        throw FormatError(std::string("SWTM: inconsistent header: ") + e.what());
    }
    if (static_cast<int>(n_rows) != cfg.grid.height / cfg.window_rows_px() ||
        static_cast<int>(n_cols) != cfg.grid.width / cfg.window_cols_px()) {
        throw FormatError("SWTM: window layout does not match grid and template");
    }
    const std::size_t count = static_cast<std::size_t>(n_rows) * n_cols * m_rows * m_cols;
    if (count > in.remaining() / 4) {
        throw FormatError("SWTM: truncated index block");
    }
    std::vector<std::uint32_t> indices(count);
    for (auto& idx : indices) {
        idx = in.u32();
    }
    std::vector<AngleCoord> coords;
    if (flag == 1) {
        if (count > in.remaining() / 16) {
            throw FormatError("SWTM: truncated coordinate block");
        }
        coords.resize(count);
        for (auto& a : coords) {
            a.lat = in.f64();
            a.lon = in.f64();
        }
    }
    if (in.remaining() != 0) {
        throw FormatError("SWTM: trailing bytes after payload");
    }
    try {
        return {cfg, std::move(indices), std::move(coords)};
    } catch (const ShapeError& e) {
        throw FormatError(std::string("SWTM: ") + e.what());
    }
}

void write_index_map(const IndexMap& map, const std::filesystem::path& path, bool include_coords) {
    detail::write_file(path, encode_index_map(map, include_coords));
}

IndexMap read_index_map(const std::filesystem::path& path) {
    return decode_index_map(detail::read_file(path));
}

} // namespace swt
