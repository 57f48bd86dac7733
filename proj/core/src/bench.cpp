#include "swt/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "swt/error.hpp"

namespace swt {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

BenchCase make_case(std::string name, const ErpGridSpec& grid, int size, int reps, const RunTimes& t,
                    std::size_t ops) {
    return {std::move(name), grid.height, grid.width, size, reps, t.median, t.min, ops};
}

void check_reps(int reps) {
    if (reps < 3) {
        throw ConfigError("benchmarks need at least 3 repetitions");
    }
}

} // namespace

const BenchCase* BenchReport::find(const std::string& name) const noexcept {
    const auto it = std::find_if(cases.begin(), cases.end(), [&](const BenchCase& c) { return c.name == name; });
    return it == cases.end() ? nullptr : &*it;
}

RunTimes time_runs(const std::function<void()>& fn, int reps) {
    using clock = std::chrono::steady_clock;
    RunTimes t;
    t.seconds.reserve(static_cast<std::size_t>(reps));
    for (int i = 0; i < reps; ++i) {
        const auto t0 = clock::now();
        fn();
        const auto t1 = clock::now();
        // Clock granularity floor keeps every recorded time strictly positive.
        t.seconds.push_back(std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9));
    }
    std::vector<double> sorted = t.seconds;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    t.min = sorted.front();
    t.median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    return t;
}

BenchReport bench_swt(const TemplateConfig& cfg, int reps, int threads) {
    check_reps(reps);
    BuildStats fast_stats;
    BuildStats naive_stats;
    const BuildOptions opts{threads, false};
    if (build_index_map_fast(cfg, opts, &fast_stats) != build_index_map_naive(cfg, opts, &naive_stats)) {
        throw Error("bench", "fast and naive index maps differ; refusing to time");
    }
    BenchReport r;
    r.threads = threads;
    const RunTimes fast = time_runs([&] { (void)build_index_map_fast(cfg, opts); }, reps);
    const RunTimes naive = time_runs([&] { (void)build_index_map_naive(cfg, opts); }, reps);
    r.cases.push_back(make_case("swt_fast", cfg.grid, cfg.m_rows, reps, fast, fast_stats.window_transforms));
    r.cases.push_back(make_case("swt_naive", cfg.grid, cfg.m_rows, reps, naive, naive_stats.window_transforms));
    return r;
}

BenchReport bench_swt_windows(const ErpGridSpec& grid, const std::vector<int>& windows, int reps, int threads) {
    check_reps(reps);
    BenchReport r;
    r.threads = threads;
    for (int m : windows) {
        const TemplateConfig cfg{m, m, 1, grid};
        BuildStats stats;
        (void)build_index_map_fast(cfg, {threads, false}, &stats);
        const RunTimes t = time_runs([&] { (void)build_index_map_fast(cfg, {threads, false}); }, reps);
        r.cases.push_back(make_case("swt_fast_w" + std::to_string(m), grid, m, reps, t, stats.window_transforms));
    }
    return r;
}

std::uint64_t tangent_grids_all_pixels(const ErpGridSpec& grid, int k) {
    const GnomonicKernel kernel(k, grid.lat_step());
    const std::size_t nodes = static_cast<std::size_t>(k) * k;
    std::vector<AngleCoord> coords(nodes * static_cast<std::size_t>(grid.width));
    std::uint64_t checksum = 0;
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            kernel.project(pixel_to_angle(r, c, grid),
                           std::span<AngleCoord>(coords.data() + static_cast<std::size_t>(c) * nodes, nodes));
        }
        for (const AngleCoord& a : coords) {
            checksum += quantize(a, grid);
        }
    }
    return checksum;
}

std::vector<std::uint32_t> cube_face_maps(const ErpGridSpec& grid, int face) {
    if (face < 1) {
        throw ConfigError("cube face size must be positive");
    }
    // Face frames: outward axis, then right and down tangent axes.
    static constexpr double kFaces[6][3][3] = {
        {{1, 0, 0}, {0, 1, 0}, {0, 0, -1}},  {{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}},
        {{0, 1, 0}, {-1, 0, 0}, {0, 0, -1}}, {{0, -1, 0}, {1, 0, 0}, {0, 0, -1}},
        {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}},   {{0, 0, -1}, {0, 1, 0}, {-1, 0, 0}},
    };
    std::vector<std::uint32_t> out;
    out.reserve(static_cast<std::size_t>(6) * face * face);
    for (const auto& f : kFaces) {
        for (int i = 0; i < face; ++i) {
            const double b = 2.0 * (i + 0.5) / face - 1.0;
            for (int j = 0; j < face; ++j) {
                const double a = 2.0 * (j + 0.5) / face - 1.0;
                const UnitVec3 d{f[0][0] + a * f[1][0] + b * f[2][0], f[0][1] + a * f[1][1] + b * f[2][1],
                                 f[0][2] + a * f[1][2] + b * f[2][2]};
                out.push_back(quantize(isp(d), grid));
            }
        }
    }
    return out;
}

BenchReport bench_baselines(const ErpGridSpec& grid, const std::vector<int>& kernels, int reps) {
    check_reps(reps);
    BenchReport r;
    for (int k : kernels) {
        if (k != 3 && k != 5 && k != 7 && k != 9) {
            throw ConfigError("tangent kernel sizes must be drawn from {3, 5, 7, 9}, got " + std::to_string(k));
        }
        volatile std::uint64_t sink = 0;
        const RunTimes t = time_runs([&] { sink = sink + tangent_grids_all_pixels(grid, k); }, reps);
        r.cases.push_back(make_case("tangent_k" + std::to_string(k), grid, k, reps, t,
                                    grid.pixel_count() * static_cast<std::size_t>(k) * k));
    }
    const int face = std::max(1, grid.height / 2);
    volatile std::size_t sink = 0;
    const RunTimes t = time_runs([&] { sink = sink + cube_face_maps(grid, face).size(); }, reps);
    r.cases.push_back(make_case("cubemap", grid, face, reps, t, static_cast<std::size_t>(6) * face * face));
    return r;
}

void append(BenchReport& into, const BenchReport& from) {
    into.cases.insert(into.cases.end(), from.cases.begin(), from.cases.end());
    into.threads = std::max(into.threads, from.threads);
}

std::string report_csv(const BenchReport& r) {
    std::ostringstream out;
    out << "# threads=" << r.threads << '\n';
    out << "name,height,width,size,reps,median_s,min_s,operations\n";
    for (const BenchCase& c : r.cases) {
        out << c.name << ',' << c.height << ',' << c.width << ',' << c.size << ',' << c.reps << ','
            << fmt_double(c.median_s) << ',' << fmt_double(c.min_s) << ',' << c.operations << '\n';
    }
    return out.str();
}

BenchReport parse_report_csv(const std::string& csv) {
    BenchReport r;
    std::istringstream in(csv);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# threads=", 0) == 0) {
            try {
                r.threads = std::stoi(line.substr(10));
            } catch (const std::exception&) {
                throw FormatError("bench CSV: malformed thread note");
            }
            continue;
        }
        if (!header_seen) {
            if (line != "name,height,width,size,reps,median_s,min_s,operations") {
                throw FormatError("bench CSV: unexpected header");
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 8) {
            throw FormatError("bench CSV: expected 8 fields, got " + std::to_string(fields.size()));
        }
        try {
            r.cases.push_back({fields[0], std::stoi(fields[1]), std::stoi(fields[2]), std::stoi(fields[3]),
                               std::stoi(fields[4]), std::stod(fields[5]), std::stod(fields[6]),
                               static_cast<std::size_t>(std::stoull(fields[7]))});
        } catch (const std::exception&) {
            throw FormatError("bench CSV: malformed row '" + line + "'");
        }
    }
    if (!header_seen) {
        throw FormatError("bench CSV: missing header");
    }
    return r;
}

std::string report_json(const BenchReport& r) {
    nlohmann::ordered_json j;
    j["threads"] = r.threads;
    for (const BenchCase& c : r.cases) {
        j[c.name + ".height"] = c.height;
        j[c.name + ".width"] = c.width;
        j[c.name + ".size"] = c.size;
        j[c.name + ".reps"] = c.reps;
        j[c.name + ".median_s"] = c.median_s;
        j[c.name + ".min_s"] = c.min_s;
        j[c.name + ".operations"] = c.operations;
    }
    const BenchCase* fast = r.find("swt_fast");
    const BenchCase* naive = r.find("swt_naive");
    if (fast != nullptr && naive != nullptr) {
        j["swt_speedup"] = naive->median_s / fast->median_s;
    }
    return j.dump(2) + "\n";
}

std::string report_summary(const BenchReport& r) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %11s %6s %5s %12s %12s %12s\n", "case", "resolution", "size", "reps",
                  "median [s]", "min [s]", "operations");
    out << line;
    for (const BenchCase& c : r.cases) {
        const std::string res = std::to_string(c.height) + "x" + std::to_string(c.width);
        std::snprintf(line, sizeof line, "%-16s %11s %6d %5d %12.6f %12.6f %12zu\n", c.name.c_str(), res.c_str(),
                      c.size, c.reps, c.median_s, c.min_s, c.operations);
        out << line;
    }
    const BenchCase* fast = r.find("swt_fast");
    const BenchCase* naive = r.find("swt_naive");
    if (fast != nullptr && naive != nullptr) {
        std::snprintf(line, sizeof line, "swt speedup (naive / fast median): %.2fx\n", naive->median_s / fast->median_s);
        out << line;
    }
    out << "threads: " << r.threads << '\n';
    return out.str();
}

} // namespace swt
