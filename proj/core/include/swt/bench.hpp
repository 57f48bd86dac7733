#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "swt/geometry.hpp"
#include "swt/transform.hpp"

namespace swt {

struct BenchCase {
    std::string name;
    int height = 0;
    int width = 0;
    int size = 0; // window size for SWT cases, kernel size for tangent, face size for cube
    int reps = 0;
    double median_s = 0.0;
    double min_s = 0.0;
    std::size_t operations = 0; // transforms or projected points per run

    friend bool operator==(const BenchCase&, const BenchCase&) = default;
};

struct BenchReport {
    std::vector<BenchCase> cases;
    int threads = 1;

    const BenchCase* find(const std::string& name) const noexcept;
    friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

struct RunTimes {
    std::vector<double> seconds;
    double median = 0.0;
    double min = 0.0;
};

/// Times `fn` `reps` times on a monotonic clock.
RunTimes time_runs(const std::function<void()>& fn, int reps);

/// Times fast and naive map construction ("swt_fast", "swt_naive"). The
/// fast map is checked against the naive one before anything is timed.
BenchReport bench_swt(const TemplateConfig& cfg, int reps, int threads = 1);

/// Fast-path time for several square window sizes at a fixed resolution
/// ("swt_fast_w<M>").
BenchReport bench_swt_windows(const ErpGridSpec& grid, const std::vector<int>& windows, int reps, int threads = 1);

/// Per-pixel tangent-plane grid generation for each kernel size
/// ("tangent_k<k>") and a six-face cube gather-map stand-in at face size H/2
/// ("cubemap").
BenchReport bench_baselines(const ErpGridSpec& grid, const std::vector<int>& kernels, int reps);

/// One gnomonic grid per ERP pixel, quantized to ERP indices. Returns a
/// checksum of all indices.
std::uint64_t tangent_grids_all_pixels(const ErpGridSpec& grid, int k);

/// Gather maps from six cube faces of `face` x `face` pixels into the ERP grid.
std::vector<std::uint32_t> cube_face_maps(const ErpGridSpec& grid, int face);

void append(BenchReport& into, const BenchReport& from);

std::string report_csv(const BenchReport& r);
BenchReport parse_report_csv(const std::string& csv);
std::string report_json(const BenchReport& r);
std::string report_summary(const BenchReport& r);

} // namespace swt
