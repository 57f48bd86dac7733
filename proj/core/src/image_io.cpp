#include "swt/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "swt/error.hpp"

namespace swt {

namespace {

namespace fs = std::filesystem;

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

int png_channels(png_uint_32 format) {
    return (format & PNG_FORMAT_FLAG_COLOR ? 3 : 1) + (format & PNG_FORMAT_FLAG_ALPHA ? 1 : 0);
}

struct PngImage {
    png_image image{};
    PngImage() { image.version = PNG_IMAGE_VERSION; }
    ~PngImage() { png_image_free(&image); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

} // namespace

FeatureMap read_png(const fs::path& path, int* bit_depth) {
    if (!fs::is_regular_file(path)) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    PngImage png;
    if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
        throw FormatError("PNG: cannot read '" + path.string() + "': " + png.image.message);
    }
    // Keep the stored layout; 16-bit files come back as 16-bit linear samples.
    png.image.format &= ~static_cast<png_uint_32>(PNG_FORMAT_FLAG_COLORMAP);
    const bool wide = (png.image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
    const int channels = png_channels(png.image.format);
    const int height = static_cast<int>(png.image.height);
    const int width = static_cast<int>(png.image.width);
    FeatureMap out(height, width, channels);
    auto values = out.values();
    if (wide) {
        std::vector<std::uint16_t> buffer(values.size());
        if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
            throw FormatError("PNG: cannot decode '" + path.string() + "': " + png.image.message);
        }
        std::copy(buffer.begin(), buffer.end(), values.begin());
    } else {
        std::vector<std::uint8_t> buffer(values.size());
        if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
            throw FormatError("PNG: cannot decode '" + path.string() + "': " + png.image.message);
        }
        std::copy(buffer.begin(), buffer.end(), values.begin());
    }
    if (bit_depth != nullptr) {
        *bit_depth = wide ? 16 : 8;
    }
    return out;
}

void write_png(const FeatureMap& image, const fs::path& path, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) {
        throw ConfigError("PNG bit depth must be 8 or 16");
    }
    static constexpr png_uint_32 kFormat[] = {PNG_FORMAT_GRAY, PNG_FORMAT_GA, PNG_FORMAT_RGB, PNG_FORMAT_RGBA};
    if (image.channels() < 1 || image.channels() > 4) {
        throw ShapeError("PNG supports 1 to 4 channels, got " + std::to_string(image.channels()));
    }
    PngImage png;
    png.image.width = static_cast<png_uint_32>(image.width());
    png.image.height = static_cast<png_uint_32>(image.height());
    png.image.format = kFormat[image.channels() - 1] | (bit_depth == 16 ? PNG_FORMAT_FLAG_LINEAR : 0u);
    const auto values = image.values();
    auto sample = [](float v, double max_value) { return std::clamp(std::round(static_cast<double>(v)), 0.0, max_value); };
    int ok = 0;
    if (bit_depth == 16) {
        std::vector<std::uint16_t> buffer(values.size());
        std::transform(values.begin(), values.end(), buffer.begin(),
                       [&](float v) { return static_cast<std::uint16_t>(sample(v, 65535.0)); });
        ok = png_image_write_to_file(&png.image, path.c_str(), 0, buffer.data(), 0, nullptr);
    } else {
        std::vector<std::uint8_t> buffer(values.size());
        std::transform(values.begin(), values.end(), buffer.begin(),
                       [&](float v) { return static_cast<std::uint8_t>(sample(v, 255.0)); });
        ok = png_image_write_to_file(&png.image, path.c_str(), 0, buffer.data(), 0, nullptr);
    }
    if (!ok) {
        throw IoError("PNG: cannot write '" + path.string() + "': " + png.image.message);
    }
}

FeatureMap read_pfm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::string magic;
    int width = 0;
    int height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    if (!in || (magic != "Pf" && magic != "PF") || width < 1 || height < 1 ||
        static_cast<long long>(width) * height > (1LL << 28) || scale == 0.0) {
        throw FormatError("PFM: malformed header in '" + path.string() + "'");
    }
    in.get(); // single whitespace before the raster
    const int channels = magic == "PF" ? 3 : 1;
    const bool little = scale < 0.0;
    FeatureMap out(height, width, channels);
    const std::size_t row_values = static_cast<std::size_t>(width) * channels;
    std::vector<unsigned char> raw(row_values * 4);
    for (int r = height - 1; r >= 0; --r) {
        if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
            throw FormatError("PFM: truncated raster in '" + path.string() + "'");
        }
        for (std::size_t i = 0; i < row_values; ++i) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) {
                const unsigned byte = raw[i * 4 + (little ? b : 3 - b)];
                bits |= static_cast<std::uint32_t>(byte) << (8 * b);
            }
            float v = 0.0f;
            std::memcpy(&v, &bits, 4);
            out.values()[static_cast<std::size_t>(r) * row_values + i] = v;
        }
    }
    return out;
}

void write_pfm(const FeatureMap& image, const fs::path& path) {
    if (image.channels() != 1 && image.channels() != 3) {
        throw ShapeError("PFM supports 1 or 3 channels, got " + std::to_string(image.channels()));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << (image.channels() == 3 ? "PF" : "Pf") << '\n' << image.width() << ' ' << image.height() << "\n-1.0\n";
    const std::size_t row_values = static_cast<std::size_t>(image.width()) * image.channels();
    std::vector<unsigned char> raw(row_values * 4);
    for (int r = image.height() - 1; r >= 0; --r) {
        for (std::size_t i = 0; i < row_values; ++i) {
            std::uint32_t bits = 0;
            const float v = image.values()[static_cast<std::size_t>(r) * row_values + i];
            std::memcpy(&bits, &v, 4);
            for (int b = 0; b < 4; ++b) {
                raw[i * 4 + b] = static_cast<unsigned char>(bits >> (8 * b));
            }
        }
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

FeatureMap read_raster(const fs::path& path, int* png_bit_depth) {
    const std::string ext = lower_extension(path);
    if (ext == ".fmap") {
        return read_fmap(path);
    }
    if (ext == ".pfm") {
        return read_pfm(path);
    }
    if (ext == ".png") {
        return read_png(path, png_bit_depth);
    }
    throw FormatError("unsupported raster extension '" + ext + "' (expected .fmap, .pfm or .png)");
}

void write_raster(const FeatureMap& image, const fs::path& path, int png_bit_depth) {
    const std::string ext = lower_extension(path);
    if (ext == ".fmap") {
        write_fmap(image, path);
    } else if (ext == ".pfm") {
        write_pfm(image, path);
    } else if (ext == ".png") {
        write_png(image, path, png_bit_depth);
    } else {
        throw FormatError("unsupported raster extension '" + ext + "' (expected .fmap, .pfm or .png)");
    }
}

FeatureMap read_depth(const fs::path& path, double png_units_per_meter) {
    FeatureMap raw = read_raster(path);
    if (raw.channels() != 1) {
        throw ShapeError("depth map '" + path.string() + "' must have one channel, has " +
                         std::to_string(raw.channels()));
    }
    if (lower_extension(path) == ".png") {
        if (!(png_units_per_meter > 0.0)) {
            throw ConfigError("PNG depth scale must be positive");
        }
        for (float& v : raw.values()) {
            v = static_cast<float>(v / png_units_per_meter);
        }
    }
    return raw;
}

} // namespace swt
