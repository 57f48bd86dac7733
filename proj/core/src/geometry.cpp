#include "swt/geometry.hpp"

#include <cmath>
#include <string>

#include "swt/error.hpp"

namespace swt {

double UnitVec3::norm() const noexcept { return std::sqrt(x * x + y * y + z * z); }

RotationMatrix::RotationMatrix() noexcept
    : m_{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}} {}

RotationMatrix RotationMatrix::yaw(double angle) noexcept {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return RotationMatrix(Rows{{{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}}});
}

RotationMatrix RotationMatrix::pitch(double angle) noexcept {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return RotationMatrix(Rows{{{c, 0.0, -s}, {0.0, 1.0, 0.0}, {s, 0.0, c}}});
}

UnitVec3 RotationMatrix::apply(const UnitVec3& p) const noexcept {
    return {m_[0][0] * p.x + m_[0][1] * p.y + m_[0][2] * p.z,
            m_[1][0] * p.x + m_[1][1] * p.y + m_[1][2] * p.z,
            m_[2][0] * p.x + m_[2][1] * p.y + m_[2][2] * p.z};
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& rhs) const noexcept {
    Rows out{};
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            out[r][c] = m_[r][0] * rhs.m_[0][c] + m_[r][1] * rhs.m_[1][c] + m_[r][2] * rhs.m_[2][c];
        }
    }
    return RotationMatrix(out);
}

RotationMatrix RotationMatrix::transposed() const noexcept {
    Rows out{};
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            out[r][c] = m_[c][r];
        }
    }
    return RotationMatrix(out);
}

double RotationMatrix::determinant() const noexcept {
    const auto& m = m_;
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

ErpGridSpec::ErpGridSpec(int h, int w) : height(h), width(w) {
    if (h < 1 || w < 2) {
        throw ConfigError("ERP grid must have height >= 1 and width >= 2, got " + std::to_string(h) +
                          "x" + std::to_string(w));
    }
}

double wrap_lon(double lon) noexcept {
    double r = std::remainder(lon, kTwoPi);
    if (r <= -kPi) {
        r += kTwoPi;
    }
    return r;
}

AngleCoord pixel_to_angle(double row, double col, const ErpGridSpec& spec) {
    const bool row_ok = std::isfinite(row) && row >= -0.5 && row <= spec.height - 0.5;
    const bool col_ok = std::isfinite(col) && col >= -0.5 && col <= spec.width - 0.5;
    if (!row_ok || !col_ok) {
        throw DomainError("pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                          ") outside " + std::to_string(spec.height) + "x" +
                          std::to_string(spec.width) + " grid");
    }
    return {kHalfPi - kPi * (row + 0.5) / spec.height, kTwoPi * (col + 0.5) / spec.width - kPi};
}

PixelCoord angle_to_pixel(const AngleCoord& a, const ErpGridSpec& spec) noexcept {
    return {(kHalfPi - a.lat) * spec.height / kPi - 0.5, (a.lon + kPi) * spec.width / kTwoPi - 0.5};
}

UnitVec3 sp(const AngleCoord& a) noexcept {
    const double cl = std::cos(a.lat);
    return {cl * std::cos(a.lon), cl * std::sin(a.lon), std::sin(a.lat)};
}

AngleCoord isp(const UnitVec3& p) {
    const double n = p.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DomainError("inverse spherical projection of a zero or non-finite vector");
    }
    UnitVec3 q = p;
    if (std::abs(n - 1.0) > 1e-9) {
        q = {p.x / n, p.y / n, p.z / n};
    }
    // atan2 form of arcsin(z): same value on the sphere, but well conditioned near the poles.
    const double planar = std::hypot(q.x, q.y);
    const double lat = std::atan2(q.z, planar);
    if (q.x == 0.0 && q.y == 0.0) {
        return {lat, 0.0};
    }
    return {lat, wrap_lon(std::atan2(q.y, q.x))};
}

RotationMatrix rotation_for(const AngleCoord& target) noexcept {
    return RotationMatrix::yaw(target.lon) * RotationMatrix::pitch(target.lat);
}

double great_circle_distance(const UnitVec3& a, const UnitVec3& b) noexcept {
    const double cx = a.y * b.z - a.z * b.y;
    const double cy = a.z * b.x - a.x * b.z;
    const double cz = a.x * b.y - a.y * b.x;
    const double dot = a.x * b.x + a.y * b.y + a.z * b.z;
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

GnomonicKernel::GnomonicKernel(int k, double step) : k_(k), step_(step) {
    if (k < 1) {
        throw ConfigError("gnomonic kernel size must be >= 1");
    }
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw ConfigError("gnomonic step must be positive and finite");
    }
    const double half = (k - 1) / 2.0;
    nodes_.reserve(static_cast<std::size_t>(k) * k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const double x = (j - half) * step;
            const double y = -(i - half) * step;
            const double rho = std::hypot(x, y);
            if (!std::isfinite(rho)) {
                throw DomainError("gnomonic lattice point beyond the tangent hemisphere");
            }
            const double c = std::atan(rho);
            const double sin_c = std::sin(c);
            const double cos_c = std::cos(c);
            nodes_.push_back({x * sin_c, y * sin_c, rho > 0.0 ? y * sin_c / rho : 0.0, rho * cos_c, cos_c,
                              rho == 0.0});
        }
    }
}

void GnomonicKernel::project(const AngleCoord& center, std::span<AngleCoord> out) const noexcept {
    const double sin_lat = std::sin(center.lat);
    const double cos_lat = std::cos(center.lat);
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        const Node& nd = nodes_[n];
        if (nd.is_center) {
            out[n] = {center.lat, wrap_lon(center.lon)};
            continue;
        }
        double s = nd.cos_c * sin_lat + nd.y_sin_c_over_rho * cos_lat;
        s = s > 1.0 ? 1.0 : (s < -1.0 ? -1.0 : s);
        const double dlon = std::atan2(nd.x_sin_c, nd.rho_cos_c * cos_lat - nd.y_sin_c * sin_lat);
        out[n] = {std::asin(s), wrap_lon(center.lon + dlon)};
    }
}

SampleGrid gnomonic_grid(const AngleCoord& center, int k, double step) {
    const GnomonicKernel kernel(k, step);
    SampleGrid grid(k, k);
    kernel.project(center, grid.coords);
    return grid;
}

} // namespace swt
