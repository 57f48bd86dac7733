#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace swt {

/// Dense H x W x C float grid, row-major over (row, col, channel).
class FeatureMap {
public:
    FeatureMap() = default;
    FeatureMap(int height, int width, int channels, float fill = 0.0f);
    FeatureMap(int height, int width, int channels, std::vector<float> values);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
    }
    std::size_t size() const noexcept { return values_.size(); }

    float& at(int row, int col, int ch) noexcept { return values_[offset(row, col) + ch]; }
    float at(int row, int col, int ch) const noexcept { return values_[offset(row, col) + ch]; }

    std::span<float> pixel(std::size_t flat_index) noexcept {
        return {values_.data() + flat_index * channels_, static_cast<std::size_t>(channels_)};
    }
    std::span<const float> pixel(std::size_t flat_index) const noexcept {
        return {values_.data() + flat_index * channels_, static_cast<std::size_t>(channels_)};
    }

    std::span<float> values() noexcept { return values_; }
    std::span<const float> values() const noexcept { return values_; }

    bool all_finite() const noexcept;
    bool same_shape(const FeatureMap& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

private:
    std::size_t offset(int row, int col) const noexcept {
        return (static_cast<std::size_t>(row) * width_ + col) * channels_;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<float> values_;
};

/// Non-overlapping windows of a feature map. Storage is window-major
/// (window-row, window-col), then node-major (node-row, node-col), then channel.
struct WindowSet {
    int n_rows = 0;
    int n_cols = 0;
    int m_rows = 0;
    int m_cols = 0;
    int channels = 0;
    std::vector<float> values;

    WindowSet() = default;
    WindowSet(int n_rows, int n_cols, int m_rows, int m_cols, int channels);

    std::size_t window_count() const noexcept { return static_cast<std::size_t>(n_rows) * n_cols; }
    std::size_t nodes_per_window() const noexcept { return static_cast<std::size_t>(m_rows) * m_cols; }
    std::size_t window_stride() const noexcept { return nodes_per_window() * channels; }

    std::span<float> window(std::size_t w) noexcept {
        return {values.data() + w * window_stride(), window_stride()};
    }
    std::span<const float> window(std::size_t w) const noexcept {
        return {values.data() + w * window_stride(), window_stride()};
    }

    bool same_geometry(const WindowSet& other) const noexcept {
        return n_rows == other.n_rows && n_cols == other.n_cols && m_rows == other.m_rows &&
               m_cols == other.m_cols;
    }

    friend bool operator==(const WindowSet&, const WindowSet&) = default;
};

WindowSet partition_windows(const FeatureMap& f, int m_rows, int m_cols);
FeatureMap merge_windows(const WindowSet& w);

/// FMAP raw tensor file: "FMAP", u16 version, u32 H, W, C, then H*W*C
/// little-endian float32 values in (row, col, channel) order.
void write_fmap(const FeatureMap& f, const std::filesystem::path& path);
FeatureMap read_fmap(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_fmap(const FeatureMap& f);
FeatureMap decode_fmap(std::span<const std::uint8_t> bytes);

} // namespace swt
