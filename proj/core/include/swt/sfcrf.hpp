#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "swt/attention.hpp"
#include "swt/feature_map.hpp"
#include "swt/transform.hpp"

namespace swt {

inline constexpr float kLayerNormEpsilon = 1e-5f;

struct LayerNormParams {
    std::vector<float> gain;
    std::vector<float> bias;

    explicit LayerNormParams(int channels = 0) : gain(channels, 1.0f), bias(channels, 0.0f) {}
    friend bool operator==(const LayerNormParams&, const LayerNormParams&) = default;
};

/// Two-layer perceptron C -> r*C -> C with a GELU in between.
struct MlpParams {
    Linear fc1;
    Linear fc2;
    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// 3x3 depth-wise kernel, stored [channel][ky][kx], plus a per-channel bias.
struct CpeParams {
    int channels = 0;
    std::vector<float> kernel;
    std::vector<float> bias;

    explicit CpeParams(int c = 0) : channels(c), kernel(static_cast<std::size_t>(c) * 9, 0.0f), bias(c, 0.0f) {}
    float& tap(int ch, int ky, int kx) { return kernel[static_cast<std::size_t>(ch) * 9 + ky * 3 + kx]; }
    float tap(int ch, int ky, int kx) const { return kernel[static_cast<std::size_t>(ch) * 9 + ky * 3 + kx]; }
    friend bool operator==(const CpeParams&, const CpeParams&) = default;
};

struct BlockParams {
    AttentionParams attn;
    LayerNormParams norm1;
    LayerNormParams norm2;
    MlpParams mlp;
    CpeParams cpe;

    int channels() const noexcept { return attn.channels(); }
    void validate() const;
    friend bool operator==(const BlockParams&, const BlockParams&) = default;
};

struct DecoderConfig {
    int levels = 4;
    int window = 4;
    std::vector<int> channels{16, 32, 64, 64}; // finest level first
    int expansion = 4;
    int heads = 0; // 0 -> default_head_count per level
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const DecoderConfig&, const DecoderConfig&) = default;
};

struct LevelParams {
    std::optional<Linear> fuse; // absent on the coarsest level
    std::array<BlockParams, 2> blocks;
    friend bool operator==(const LevelParams&, const LevelParams&) = default;
};

struct DecoderParams {
    std::vector<LevelParams> levels; // finest first
    Linear head;
    friend bool operator==(const DecoderParams&, const DecoderParams&) = default;
};

/// Intra-forward options. `threads` never changes numeric results.
struct ForwardOptions {
    int threads = 1;
    bool spherical = true; // false replaces every SWT gather with identity_index_map
};

/// Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) projections; zero biases
/// and CPE; unit norm gains.
BlockParams init_block_params(int channels, int heads, int expansion, std::mt19937_64& rng);
BlockParams zero_block_params(int channels, int heads, int expansion);
DecoderParams init_decoder_params(const DecoderConfig& cfg);

/// f + depthwise 3x3 conv(f); columns wrap, rows are zero padded.
FeatureMap cpe(const FeatureMap& f, const CpeParams& p);

FeatureMap layer_norm(const FeatureMap& f, const LayerNormParams& p, int threads = 1);
FeatureMap mlp(const FeatureMap& f, const MlpParams& p, int threads = 1);

/// Planar-spherical interaction: queries and values from regular windows,
/// keys projected on the full map and then gathered through `map`.
FeatureMap psi_forward(const FeatureMap& f, const AttentionParams& p, const IndexMap& map,
                       int threads = 1, AttentionStats* stats = nullptr);

/// Plain window self-attention with the same parameters (keys from the
/// regular partition).
FeatureMap window_attention(const FeatureMap& f, const AttentionParams& p, int m_rows, int m_cols,
                            int threads = 1, AttentionStats* stats = nullptr);

/// x = cpe(f); s = x + psi(norm1(x)); out = s + mlp(norm2(s)).
FeatureMap sfcrf_block(const FeatureMap& f, const BlockParams& bp, const IndexMap& map, int threads = 1);

/// Window template used on one decoder level: the configured window clamped
/// to the level's spatial size.
TemplateConfig level_template(const DecoderConfig& cfg, int height, int width);

/// Pyramid is finest first (H/4 ... H/32). Returns a 1-channel positive depth
/// map at 4x the finest level's resolution.
FeatureMap decoder_forward(const std::vector<FeatureMap>& pyramid, const DecoderConfig& cfg,
                           const DecoderParams& params, const ForwardOptions& opts = {});

/// Seeded uniform(-1, 1) features shaped for an H x W input.
std::vector<FeatureMap> random_pyramid(int height, int width, const DecoderConfig& cfg, std::uint64_t seed);

FeatureMap upsample_nearest2x(const FeatureMap& f);
/// Half-pixel-center bilinear upsampling; columns wrap, rows clamp.
FeatureMap upsample_bilinear(const FeatureMap& f, int factor);
FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);

/// Parameter bundle: a directory with `manifest.txt` (key = value lines) and
/// one FMAP file per tensor.
void save_decoder_params(const DecoderParams& params, const DecoderConfig& cfg, const std::filesystem::path& dir);
std::pair<DecoderParams, DecoderConfig> load_decoder_params(const std::filesystem::path& dir);

} // namespace swt
