#include "byte_io.hpp"

#include <fstream>
#include <iterator>

#include "swt/error.hpp"

namespace swt::detail {

void ByteReader::expect_magic(std::string_view m) {
    require(m.size());
    if (std::memcmp(bytes_.data() + pos_, m.data(), m.size()) != 0) {
        throw FormatError(std::string(format_) + ": bad magic, expected '" + std::string(m) + "'");
    }
    pos_ += m.size();
}

void ByteReader::require(std::size_t n) const {
    if (remaining() < n) {
        throw FormatError(std::string(format_) + ": truncated input");
    }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

} // namespace swt::detail
