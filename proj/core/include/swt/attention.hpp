#pragma once

#include <span>
#include <vector>

#include "swt/feature_map.hpp"

namespace swt {

/// Dense affine layer y = W x + b with W stored row-major (out x in).
struct Linear {
    int in_features = 0;
    int out_features = 0;
    std::vector<float> weight;
    std::vector<float> bias;

    Linear() = default;
    Linear(int in, int out); // zero-initialized

    static Linear identity(int n);

    void apply(std::span<const float> x, std::span<float> y) const noexcept;
    /// Per-pixel (1x1) application over a feature map.
    FeatureMap apply(const FeatureMap& f, int threads = 1) const;

    friend bool operator==(const Linear&, const Linear&) = default;
};

/// Query/key/value input projections, output projection and head count.
struct AttentionParams {
    Linear q;
    Linear k;
    Linear v;
    Linear out;
    int heads = 1;

    int channels() const noexcept { return q.in_features; }
    /// Throws ConfigError on non-square projections or channels % heads != 0.
    void validate() const;

    friend bool operator==(const AttentionParams&, const AttentionParams&) = default;
};

/// Heads used when none is requested: channels / 32, at least 1.
int default_head_count(int channels) noexcept;

struct AttentionStats {
    /// max |sum_j a_ij - 1| over every attention row seen.
    double max_row_sum_error = 0.0;
};

/// Multi-head attention per window on already-projected inputs:
/// softmax(Q_h K_h^T / sqrt(d_h)) V_h per head, heads concatenated, then the
/// output projection. Only `params.out` and `params.heads` are used here.
/// Softmax uses per-row max subtraction and 64-bit accumulation.
WindowSet mhsa(const WindowSet& q, const WindowSet& k, const WindowSet& v, const AttentionParams& params,
               int threads = 1, AttentionStats* stats = nullptr);

} // namespace swt
