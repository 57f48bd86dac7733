#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swt {

/// Base of every error thrown by the library. `category()` is a short,
/// stable token the CLI prints as a machine-parsable prefix.
class Error : public std::runtime_error {
public:
    Error(std::string_view category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    std::string_view category() const noexcept { return category_; }

private:
    std::string_view category_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& what) : Error("format", what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error("io", what) {}
};

struct EmptyMaskError : Error {
    explicit EmptyMaskError(const std::string& what) : Error("empty-mask", what) {}
};

struct DegenerateScaleError : Error {
    explicit DegenerateScaleError(const std::string& what) : Error("degenerate-scale", what) {}
};

} // namespace swt
