#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "swt/feature_map.hpp"
#include "swt/geometry.hpp"

namespace swt::test {

// Seeded generators shared by the property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    AngleCoord angle(double lat_margin = 0.0) {
        return {uniform(-kHalfPi + lat_margin, kHalfPi - lat_margin), uniform(-kPi, kPi)};
    }

    UnitVec3 unit_vector() {
        std::normal_distribution<double> n;
        for (;;) {
            const UnitVec3 v{n(rng_), n(rng_), n(rng_)};
            const double len = v.norm();
            if (len > 1e-6) {
                return {v.x / len, v.y / len, v.z / len};
            }
        }
    }

    FeatureMap features(int h, int w, int c, float lo = -1.0f, float hi = 1.0f) {
        std::uniform_real_distribution<float> d(lo, hi);
        FeatureMap f(h, w, c);
        for (float& v : f.values()) {
            v = d(rng_);
        }
        return f;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("swt_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
    double worst = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        worst = std::max(worst, std::abs(static_cast<double>(av[i]) - bv[i]));
    }
    return worst;
}

} // namespace swt::test
