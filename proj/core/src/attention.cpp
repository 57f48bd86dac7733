#include "swt/attention.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "swt/error.hpp"
#include "swt/parallel.hpp"

namespace swt {

Linear::Linear(int in, int out)
    : in_features(in),
      out_features(out),
      weight(static_cast<std::size_t>(in) * out, 0.0f),
      bias(static_cast<std::size_t>(out), 0.0f) {
    if (in < 1 || out < 1) {
        throw ConfigError("linear layer needs positive dimensions");
    }
}

Linear Linear::identity(int n) {
    Linear l(n, n);
    for (int i = 0; i < n; ++i) {
        l.weight[static_cast<std::size_t>(i) * n + i] = 1.0f;
    }
    return l;
}

void Linear::apply(std::span<const float> x, std::span<float> y) const noexcept {
    const float* w = weight.data();
    for (int o = 0; o < out_features; ++o, w += in_features) {
        double acc = bias[o];
        for (int i = 0; i < in_features; ++i) {
            acc += static_cast<double>(w[i]) * x[i];
        }
        y[o] = static_cast<float>(acc);
    }
}

FeatureMap Linear::apply(const FeatureMap& f, int threads) const {
    if (f.channels() != in_features) {
        throw ShapeError("linear layer expects " + std::to_string(in_features) + " channels, got " +
                         std::to_string(f.channels()));
    }
    FeatureMap out(f.height(), f.width(), out_features);
    parallel_for(f.pixel_count(), threads, [&](std::size_t p) { apply(f.pixel(p), out.pixel(p)); });
    return out;
}

void AttentionParams::validate() const {
    const int c = q.in_features;
    for (const Linear* l : {&q, &k, &v, &out}) {
        if (l->in_features != c || l->out_features != c) {
            throw ConfigError("attention projections must all be " + std::to_string(c) + "x" +
                              std::to_string(c));
        }
    }
    if (heads < 1 || c % heads != 0) {
        throw ConfigError("channel count " + std::to_string(c) + " is not divisible by " +
                          std::to_string(heads) + " heads");
    }
}

int default_head_count(int channels) noexcept { return std::max(1, channels / 32); }

WindowSet mhsa(const WindowSet& q, const WindowSet& k, const WindowSet& v, const AttentionParams& params,
               int threads, AttentionStats* stats) {
    params.validate();
    const int c = params.channels();
    if (q.channels != c || k.channels != c || v.channels != c) {
        throw ShapeError("attention inputs must have " + std::to_string(c) + " channels");
    }
    if (!q.same_geometry(v) || q.window_count() != k.window_count() ||
        q.nodes_per_window() != k.nodes_per_window()) {
        throw ShapeError("query, key and value windows disagree in geometry");
    }
    const int heads = params.heads;
    const int dh = c / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const std::size_t nodes = q.nodes_per_window();

    WindowSet out(q.n_rows, q.n_cols, q.m_rows, q.m_cols, c);
    std::mutex stats_mutex;
    parallel_for(q.window_count(), threads, [&](std::size_t w) {
        const float* qw = q.window(w).data();
        const float* kw = k.window(w).data();
        const float* vw = v.window(w).data();
        std::vector<double> logits(nodes);
        std::vector<float> mixed(static_cast<std::size_t>(c));
        double worst = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            for (int h = 0; h < heads; ++h) {
                const float* qi = qw + i * c + h * dh;
                double row_max = -INFINITY;
                for (std::size_t j = 0; j < nodes; ++j) {
                    const float* kj = kw + j * c + h * dh;
                    double dot = 0.0;
                    for (int d = 0; d < dh; ++d) {
                        dot += static_cast<double>(qi[d]) * kj[d];
                    }
                    logits[j] = dot * scale;
                    row_max = std::max(row_max, logits[j]);
                }
                double norm = 0.0;
                for (auto& l : logits) {
                    l = std::exp(l - row_max);
                    norm += l;
                }
                double row_sum = 0.0;
                for (auto& l : logits) {
                    l /= norm;
                    row_sum += l;
                }
                worst = std::max(worst, std::abs(row_sum - 1.0));
                for (int d = 0; d < dh; ++d) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < nodes; ++j) {
                        acc += logits[j] * vw[j * c + h * dh + d];
                    }
                    mixed[h * dh + d] = static_cast<float>(acc);
                }
            }
            params.out.apply(mixed, out.window(w).subspan(i * c, static_cast<std::size_t>(c)));
        }
        if (stats != nullptr) {
            std::lock_guard lock(stats_mutex);
            stats->max_row_sum_error = std::max(stats->max_row_sum_error, worst);
        }
    });
    return out;
}

} // namespace swt
