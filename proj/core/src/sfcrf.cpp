#include "swt/sfcrf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swt/error.hpp"
#include "swt/parallel.hpp"

namespace swt {

namespace {

std::string shape_str(const FeatureMap& f) {
    return std::to_string(f.height()) + "x" + std::to_string(f.width()) + "x" + std::to_string(f.channels());
}

void fill_uniform(std::vector<float>& v, float bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (auto& x : v) {
        x = dist(rng);
    }
}

Linear random_linear(int in, int out, std::mt19937_64& rng) {
    Linear l(in, out);
    fill_uniform(l.weight, 1.0f / std::sqrt(static_cast<float>(in)), rng);
    return l;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double softplus(double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); }

long long wrap(long long v, long long n) {
    const long long r = v % n;
    return r < 0 ? r + n : r;
}

void check_norm(const LayerNormParams& n, int c, const char* what) {
    if (static_cast<int>(n.gain.size()) != c || static_cast<int>(n.bias.size()) != c) {
        throw ConfigError(std::string(what) + " has the wrong channel count");
    }
}

} // namespace

void BlockParams::validate() const {
    attn.validate();
    const int c = channels();
    check_norm(norm1, c, "norm1");
    check_norm(norm2, c, "norm2");
    if (mlp.fc1.in_features != c || mlp.fc2.out_features != c || mlp.fc1.out_features != mlp.fc2.in_features ||
        mlp.fc1.out_features < c) {
        throw ConfigError("MLP must map C -> rC -> C with r >= 1");
    }
    if (cpe.channels != c || cpe.kernel.size() != static_cast<std::size_t>(c) * 9 ||
        cpe.bias.size() != static_cast<std::size_t>(c)) {
        throw ConfigError("CPE kernel must be 3x3 per channel");
    }
}

void DecoderConfig::validate() const {
    if (levels < 1) {
        throw ConfigError("decoder needs at least one level");
    }
    if (static_cast<int>(channels.size()) != levels) {
        throw ConfigError("decoder needs one channel count per level");
    }
    if (window < 1 || expansion < 1) {
        throw ConfigError("window size and expansion ratio must be >= 1");
    }
    for (int c : channels) {
        const int h = heads == 0 ? default_head_count(c) : heads;
        if (c < 1 || h < 1 || c % h != 0) {
            throw ConfigError("level channel count " + std::to_string(c) + " not divisible by " +
                              std::to_string(h) + " heads");
        }
    }
}

BlockParams init_block_params(int channels, int heads, int expansion, std::mt19937_64& rng) {
    BlockParams bp;
    bp.attn.q = random_linear(channels, channels, rng);
    bp.attn.k = random_linear(channels, channels, rng);
    bp.attn.v = random_linear(channels, channels, rng);
    bp.attn.out = random_linear(channels, channels, rng);
    bp.attn.heads = heads;
    bp.norm1 = LayerNormParams(channels);
    bp.norm2 = LayerNormParams(channels);
    bp.mlp.fc1 = random_linear(channels, expansion * channels, rng);
    bp.mlp.fc2 = random_linear(expansion * channels, channels, rng);
    bp.cpe = CpeParams(channels);
    bp.validate();
    return bp;
}

BlockParams zero_block_params(int channels, int heads, int expansion) {
    BlockParams bp;
    bp.attn = {Linear(channels, channels), Linear(channels, channels), Linear(channels, channels),
               Linear(channels, channels), heads};
    bp.norm1 = LayerNormParams(channels);
    bp.norm2 = LayerNormParams(channels);
    std::fill(bp.norm1.gain.begin(), bp.norm1.gain.end(), 0.0f);
    std::fill(bp.norm2.gain.begin(), bp.norm2.gain.end(), 0.0f);
    bp.mlp = {Linear(channels, expansion * channels), Linear(expansion * channels, channels)};
    bp.cpe = CpeParams(channels);
    bp.validate();
    return bp;
}

DecoderParams init_decoder_params(const DecoderConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    DecoderParams params;
    params.levels.resize(static_cast<std::size_t>(cfg.levels));
    for (int l = 0; l < cfg.levels; ++l) {
        const int c = cfg.channels[l];
        const int heads = cfg.heads == 0 ? default_head_count(c) : cfg.heads;
        auto& level = params.levels[l];
        if (l + 1 < cfg.levels) {
            level.fuse = random_linear(cfg.channels[l + 1] + c, c, rng);
        }
        for (auto& block : level.blocks) {
            block = init_block_params(c, heads, cfg.expansion, rng);
        }
    }
    params.head = random_linear(cfg.channels[0], 1, rng);
    return params;
}

FeatureMap cpe(const FeatureMap& f, const CpeParams& p) {
    if (p.channels != f.channels()) {
        throw ShapeError("CPE kernel has " + std::to_string(p.channels) + " channels, input is " + shape_str(f));
    }
    const int h = f.height();
    const int w = f.width();
    const int c = f.channels();
    FeatureMap out(h, w, c);
    for (int r = 0; r < h; ++r) {
        for (int col = 0; col < w; ++col) {
            for (int ch = 0; ch < c; ++ch) {
                double acc = p.bias[ch];
                for (int ky = 0; ky < 3; ++ky) {
                    const int rr = r + ky - 1;
                    if (rr < 0 || rr >= h) {
                        continue;
                    }
                    for (int kx = 0; kx < 3; ++kx) {
                        const int cc = static_cast<int>(wrap(col + kx - 1, w));
                        acc += static_cast<double>(p.tap(ch, ky, kx)) * f.at(rr, cc, ch);
                    }
                }
                out.at(r, col, ch) = f.at(r, col, ch) + static_cast<float>(acc);
            }
        }
    }
    return out;
}

FeatureMap layer_norm(const FeatureMap& f, const LayerNormParams& p, int threads) {
    const int c = f.channels();
    check_norm(p, c, "layer norm");
    FeatureMap out(f.height(), f.width(), c);
    parallel_for(f.pixel_count(), threads, [&](std::size_t i) {
        const auto x = f.pixel(i);
        auto y = out.pixel(i);
        double mean = 0.0;
        for (float v : x) {
            mean += v;
        }
        mean /= c;
        double var = 0.0;
        for (float v : x) {
            var += (v - mean) * (v - mean);
        }
        var /= c;
        const double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
        for (int ch = 0; ch < c; ++ch) {
            y[ch] = static_cast<float>((x[ch] - mean) * inv * p.gain[ch] + p.bias[ch]);
        }
    });
    return out;
}

FeatureMap mlp(const FeatureMap& f, const MlpParams& p, int threads) {
    if (f.channels() != p.fc1.in_features) {
        throw ShapeError("MLP expects " + std::to_string(p.fc1.in_features) + " channels, input is " +
                         shape_str(f));
    }
    FeatureMap out(f.height(), f.width(), p.fc2.out_features);
    parallel_for(f.pixel_count(), threads, [&](std::size_t i) {
        std::vector<float> hidden(static_cast<std::size_t>(p.fc1.out_features));
        p.fc1.apply(f.pixel(i), hidden);
        for (auto& h : hidden) {
            h = static_cast<float>(gelu(h));
        }
        p.fc2.apply(hidden, out.pixel(i));
    });
    return out;
}

FeatureMap psi_forward(const FeatureMap& f, const AttentionParams& p, const IndexMap& map, int threads,
                       AttentionStats* stats) {
    p.validate();
    const TemplateConfig& cfg = map.config();
    if (f.height() != cfg.grid.height || f.width() != cfg.grid.width) {
        throw ShapeError("input " + shape_str(f) + " does not match index map grid " +
                         std::to_string(cfg.grid.height) + "x" + std::to_string(cfg.grid.width));
    }
    if (cfg.dilation != 1) {
        throw ShapeError("PSI needs an undilated map so transformed and regular windows align");
    }
    if (f.channels() != p.channels()) {
        throw ShapeError("input " + shape_str(f) + " does not match attention width " +
                         std::to_string(p.channels()));
    }
    const FeatureMap q = p.q.apply(f, threads);
    const FeatureMap k = p.k.apply(f, threads);
    const FeatureMap v = p.v.apply(f, threads);
    const WindowSet qw = partition_windows(q, cfg.m_rows, cfg.m_cols);
    const WindowSet vw = partition_windows(v, cfg.m_rows, cfg.m_cols);
    const WindowSet kt = sample(k, map, SampleMode::nearest, threads);
    return merge_windows(mhsa(qw, kt, vw, p, threads, stats));
}

FeatureMap window_attention(const FeatureMap& f, const AttentionParams& p, int m_rows, int m_cols, int threads,
                            AttentionStats* stats) {
    p.validate();
    if (f.channels() != p.channels()) {
        throw ShapeError("input " + shape_str(f) + " does not match attention width " +
                         std::to_string(p.channels()));
    }
    const WindowSet qw = partition_windows(p.q.apply(f, threads), m_rows, m_cols);
    const WindowSet kw = partition_windows(p.k.apply(f, threads), m_rows, m_cols);
    const WindowSet vw = partition_windows(p.v.apply(f, threads), m_rows, m_cols);
    return merge_windows(mhsa(qw, kw, vw, p, threads, stats));
}

FeatureMap sfcrf_block(const FeatureMap& f, const BlockParams& bp, const IndexMap& map, int threads) {
    bp.validate();
    if (f.channels() != bp.channels()) {
        throw ShapeError("block expects " + std::to_string(bp.channels()) + " channels, input is " + shape_str(f));
    }
    const FeatureMap x = cpe(f, bp.cpe);
    const FeatureMap pairwise = psi_forward(layer_norm(x, bp.norm1, threads), bp.attn, map, threads);
    // Unary potential is the identity: s = x + pairwise.
    FeatureMap s = x;
    auto sv = s.values();
    auto pv = pairwise.values();
    for (std::size_t i = 0; i < sv.size(); ++i) {
        sv[i] += pv[i];
    }
    const FeatureMap refined = mlp(layer_norm(s, bp.norm2, threads), bp.mlp, threads);
    auto rv = refined.values();
    for (std::size_t i = 0; i < sv.size(); ++i) {
        sv[i] += rv[i];
    }
    return s;
}

TemplateConfig level_template(const DecoderConfig& cfg, int height, int width) {
    TemplateConfig t{std::min(cfg.window, height), std::min(cfg.window, width), 1, ErpGridSpec(height, width)};
    t.validate_tiling();
    return t;
}

FeatureMap upsample_nearest2x(const FeatureMap& f) {
    FeatureMap out(f.height() * 2, f.width() * 2, f.channels());
    for (int r = 0; r < out.height(); ++r) {
        for (int c = 0; c < out.width(); ++c) {
            const auto src = f.pixel(static_cast<std::size_t>(r / 2) * f.width() + c / 2);
            std::copy(src.begin(), src.end(), out.pixel(static_cast<std::size_t>(r) * out.width() + c).begin());
        }
    }
    return out;
}

FeatureMap upsample_bilinear(const FeatureMap& f, int factor) {
    if (factor < 1) {
        throw ConfigError("upsampling factor must be >= 1");
    }
    const int h = f.height();
    const int w = f.width();
    const int ch = f.channels();
    FeatureMap out(h * factor, w * factor, ch);
    for (int r = 0; r < out.height(); ++r) {
        const double sr = (r + 0.5) / factor - 0.5;
        const double r0f = std::floor(sr);
        const double fr = sr - r0f;
        const long long r0 = std::clamp(static_cast<long long>(r0f), 0LL, h - 1LL);
        const long long r1 = std::clamp(static_cast<long long>(r0f) + 1, 0LL, h - 1LL);
        for (int c = 0; c < out.width(); ++c) {
            const double sc = (c + 0.5) / factor - 0.5;
            const double c0f = std::floor(sc);
            const double fc = sc - c0f;
            const long long c0 = wrap(static_cast<long long>(c0f), w);
            const long long c1 = wrap(static_cast<long long>(c0f) + 1, w);
            for (int k = 0; k < ch; ++k) {
                const double v = (1 - fr) * ((1 - fc) * f.at(static_cast<int>(r0), static_cast<int>(c0), k) +
                                             fc * f.at(static_cast<int>(r0), static_cast<int>(c1), k)) +
                                 fr * ((1 - fc) * f.at(static_cast<int>(r1), static_cast<int>(c0), k) +
                                       fc * f.at(static_cast<int>(r1), static_cast<int>(c1), k));
                out.at(r, c, k) = static_cast<float>(v);
            }
        }
    }
    return out;
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw ShapeError("cannot concatenate " + shape_str(a) + " with " + shape_str(b));
    }
    FeatureMap out(a.height(), a.width(), a.channels() + b.channels());
    for (std::size_t p = 0; p < a.pixel_count(); ++p) {
        auto dst = out.pixel(p);
        const auto pa = a.pixel(p);
        const auto pb = b.pixel(p);
        std::copy(pa.begin(), pa.end(), dst.begin());
        std::copy(pb.begin(), pb.end(), dst.begin() + a.channels());
    }
    return out;
}

FeatureMap decoder_forward(const std::vector<FeatureMap>& pyramid, const DecoderConfig& cfg,
                           const DecoderParams& params, const ForwardOptions& opts) {
    cfg.validate();
    const int levels = cfg.levels;
    if (static_cast<int>(pyramid.size()) != levels || static_cast<int>(params.levels.size()) != levels) {
        throw ShapeError("pyramid and parameters must both have " + std::to_string(levels) + " levels");
    }
    for (int l = 0; l < levels; ++l) {
        if (pyramid[l].channels() != cfg.channels[l]) {
            throw ShapeError("pyramid level " + std::to_string(l) + " is " + shape_str(pyramid[l]) + ", expected " +
                             std::to_string(cfg.channels[l]) + " channels");
        }
        if (l > 0 && (pyramid[l].height() * 2 != pyramid[l - 1].height() ||
                      pyramid[l].width() * 2 != pyramid[l - 1].width())) {
            throw ShapeError("pyramid level " + std::to_string(l) + " must be half the resolution of level " +
                             std::to_string(l - 1));
        }
    }

    FeatureMap x;
    for (int l = levels - 1; l >= 0; --l) {
        const LevelParams& lp = params.levels[l];
        if (l == levels - 1) {
            x = pyramid[l];
        } else {
            if (!lp.fuse) {
                throw ConfigError("level " + std::to_string(l) + " is missing its skip fusion projection");
            }
            x = lp.fuse->apply(concat_channels(upsample_nearest2x(x), pyramid[l]), opts.threads);
        }
        const TemplateConfig tpl = level_template(cfg, x.height(), x.width());
        const IndexMap map =
            opts.spherical ? build_index_map_fast(tpl, {opts.threads, false}) : identity_index_map(tpl);
        for (const BlockParams& bp : lp.blocks) {
            x = sfcrf_block(x, bp, map, opts.threads);
        }
    }

    FeatureMap depth = params.head.apply(x, opts.threads);
    for (float& v : depth.values()) {
        v = static_cast<float>(softplus(v));
    }
    return upsample_bilinear(depth, 4);
}

std::vector<FeatureMap> random_pyramid(int height, int width, const DecoderConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<FeatureMap> pyramid;
    for (int l = 0; l < cfg.levels; ++l) {
        const int scale = 4 << l;
        if (height % scale != 0 || width % scale != 0) {
            throw ShapeError("input " + std::to_string(height) + "x" + std::to_string(width) +
                             " is not divisible by " + std::to_string(scale));
        }
        FeatureMap f(height / scale, width / scale, cfg.channels[l]);
        for (float& v : f.values()) {
            v = dist(rng);
        }
        pyramid.push_back(std::move(f));
    }
    return pyramid;
}

} // namespace swt
