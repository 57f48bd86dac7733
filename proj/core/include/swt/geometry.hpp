#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace swt {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Latitude/longitude in radians. Equator is lat = 0, north pole lat = +pi/2,
/// lon in (-pi, pi].
struct AngleCoord {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const AngleCoord&, const AngleCoord&) = default;
};

struct UnitVec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const noexcept;
    friend bool operator==(const UnitVec3&, const UnitVec3&) = default;
};

/// Continuous pixel position; integer values are pixel centers.
struct PixelCoord {
    double row = 0.0;
    double col = 0.0;
};

class RotationMatrix {
public:
    using Rows = std::array<std::array<double, 3>, 3>;

    RotationMatrix() noexcept; // identity
    explicit RotationMatrix(const Rows& m) noexcept : m_(m) {}

    static RotationMatrix yaw(double angle) noexcept;   // about +z, +angle moves +x toward +y
    static RotationMatrix pitch(double angle) noexcept; // about y, +angle moves +x toward +z

    double operator()(std::size_t r, std::size_t c) const noexcept { return m_[r][c]; }
    const Rows& rows() const noexcept { return m_; }

    UnitVec3 apply(const UnitVec3& p) const noexcept;
    RotationMatrix operator*(const RotationMatrix& rhs) const noexcept;
    RotationMatrix transposed() const noexcept;
    double determinant() const noexcept;

private:
    Rows m_;
};

/// ERP pixel lattice. Canonical panoramas are 2:1 but other aspect ratios are
/// accepted; `is_canonical()` reports which.
struct ErpGridSpec {
    int height = 0;
    int width = 0;

    ErpGridSpec() = default;
    ErpGridSpec(int h, int w);

    bool is_canonical() const noexcept { return width == 2 * height; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    double lat_step() const noexcept { return kPi / height; }
    double lon_step() const noexcept { return kTwoPi / width; }

    friend bool operator==(const ErpGridSpec&, const ErpGridSpec&) = default;
};

/// Row-major grid of continuous sample positions on the sphere.
struct SampleGrid {
    int rows = 0;
    int cols = 0;
    std::vector<AngleCoord> coords;

    SampleGrid() = default;
    SampleGrid(int r, int c) : rows(r), cols(c), coords(static_cast<std::size_t>(r) * c) {}

    AngleCoord& at(int i, int j) { return coords[static_cast<std::size_t>(i) * cols + j]; }
    const AngleCoord& at(int i, int j) const { return coords[static_cast<std::size_t>(i) * cols + j]; }
};

/// Wraps any longitude into (-pi, pi].
double wrap_lon(double lon) noexcept;

/// Pixel centers sit at half-integer angular offsets from the image border.
/// Accepts continuous coordinates in [-0.5, H-0.5] x [-0.5, W-0.5].
AngleCoord pixel_to_angle(double row, double col, const ErpGridSpec& spec);
PixelCoord angle_to_pixel(const AngleCoord& a, const ErpGridSpec& spec) noexcept;

/// Spherical projection of an angle pair onto the unit sphere.
UnitVec3 sp(const AngleCoord& a) noexcept;

/// Inverse spherical projection. Vectors off the unit sphere by more than 1e-9
/// are renormalized; the zero vector throws DomainError. Longitude at the
/// poles is canonicalized to 0.
AngleCoord isp(const UnitVec3& p);

/// Rotation taking the template center (0, 0) onto `target`: pitch by
/// target.lat first, then yaw by target.lon.
RotationMatrix rotation_for(const AngleCoord& target) noexcept;

double great_circle_distance(const UnitVec3& a, const UnitVec3& b) noexcept;

/// k x k inverse-gnomonic sampling grid around `center`. Row 0 is the
/// northernmost row, column 0 the westernmost; `step` is the tangent-plane
/// lattice spacing.
SampleGrid gnomonic_grid(const AngleCoord& center, int k, double step);

/// Precomputed tangent-plane lattice for repeated gnomonic grid generation.
class GnomonicKernel {
public:
    GnomonicKernel(int k, double step);

    int size() const noexcept { return k_; }
    double step() const noexcept { return step_; }

    /// Writes k*k coordinates (row-major); `out` must hold at least that many.
    void project(const AngleCoord& center, std::span<AngleCoord> out) const noexcept;

private:
    // c = atan(rho) is the angular distance of a lattice point from the center.
    struct Node {
        double x_sin_c;
        double y_sin_c;
        double y_sin_c_over_rho; // 0 at the center
        double rho_cos_c;
        double cos_c;
        bool is_center;
    };

    int k_;
    double step_;
    std::vector<Node> nodes_;
};

} // namespace swt
