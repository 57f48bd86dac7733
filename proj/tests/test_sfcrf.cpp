#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "support.hpp"
#include "swt/error.hpp"
#include "swt/sfcrf.hpp"

namespace swt {
namespace {

using test::Gen;
using test::max_abs_diff;

TemplateConfig tpl(int h, int w, int m) { return {m, m, 1, ErpGridSpec(h, w)}; }

BlockParams random_block(int c, std::uint64_t seed, bool random_cpe = false) {
    std::mt19937_64 rng(seed);
    BlockParams bp = init_block_params(c, std::max(1, c / 4), 4, rng);
    if (random_cpe) {
        std::uniform_real_distribution<float> d(-0.2f, 0.2f);
        for (float& k : bp.cpe.kernel) {
            k = d(rng);
        }
    }
    return bp;
}

TEST(Cpe, ZeroKernelIsIdentity) {
    Gen gen(51);
    const FeatureMap f = gen.features(5, 7, 3);
    EXPECT_EQ(cpe(f, CpeParams(3)), f);
}

TEST(Cpe, CenterTapDoubles) {
    Gen gen(52);
    const FeatureMap f = gen.features(5, 7, 2);
    CpeParams p(2);
    p.tap(0, 1, 1) = 1.0f;
    p.tap(1, 1, 1) = 1.0f;
    const FeatureMap out = cpe(f, p);
    for (std::size_t i = 0; i < f.size(); ++i) {
        ASSERT_EQ(out.values()[i], 2 * f.values()[i]);
    }
}

TEST(Cpe, SeamReadsOppositeEdge) {
    // Row r holds values r*10 + col; taps (1, 2, 3) on the middle kernel row.
    FeatureMap f(3, 5, 1);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 5; ++c) {
            f.at(r, c, 0) = static_cast<float>(r * 10 + c);
        }
    }
    CpeParams p(1);
    p.tap(0, 1, 0) = 1.0f;
    p.tap(0, 1, 1) = 2.0f;
    p.tap(0, 1, 2) = 3.0f;
    const FeatureMap out = cpe(f, p);
    // col 0 of row 1: left neighbor wraps to col 4 (value 14).
    EXPECT_FLOAT_EQ(out.at(1, 0, 0), 10 + (1 * 14 + 2 * 10 + 3 * 11));
    // col 4 of row 1: right neighbor wraps to col 0 (value 10).
    EXPECT_FLOAT_EQ(out.at(1, 4, 0), 14 + (1 * 13 + 2 * 14 + 3 * 10));
}

TEST(Cpe, RowsAreZeroPadded) {
    FeatureMap f(2, 3, 1, 1.0f);
    CpeParams p(1);
    p.tap(0, 0, 1) = 1.0f; // reads the row above
    const FeatureMap out = cpe(f, p);
    EXPECT_FLOAT_EQ(out.at(0, 1, 0), 1.0f);
    EXPECT_FLOAT_EQ(out.at(1, 1, 0), 2.0f);
    EXPECT_THROW(cpe(f, CpeParams(2)), ShapeError);
}

TEST(LayerNorm, NormalizesEachPixel) {
    Gen gen(53);
    const FeatureMap f = gen.features(3, 4, 6, -3, 5);
    const FeatureMap y = layer_norm(f, LayerNormParams(6));
    for (std::size_t p = 0; p < y.pixel_count(); ++p) {
        double mean = 0;
        double sq = 0;
        for (float v : y.pixel(p)) {
            mean += v;
            sq += double(v) * v;
        }
        mean /= 6;
        EXPECT_NEAR(mean, 0.0, 1e-6);
        EXPECT_NEAR(sq / 6 - mean * mean, 1.0, 1e-3);
    }
}

TEST(Mlp, GeluReferenceValue) {
    MlpParams p{Linear::identity(1), Linear::identity(1)};
    const FeatureMap out = mlp(FeatureMap(1, 1, 1, 1.0f), p);
    EXPECT_NEAR(out.values()[0], 0.8413447460685429, 1e-7);
}

TEST(Psi, IdentityGatherIsWindowAttention) {
    Gen gen(54);
    const FeatureMap f = gen.features(16, 32, 8);
    const BlockParams bp = random_block(8, 1);
    const FeatureMap a = psi_forward(f, bp.attn, identity_index_map(tpl(16, 32, 4)));
    const FeatureMap b = window_attention(f, bp.attn, 4, 4);
    EXPECT_LE(max_abs_diff(a, b), 1e-6);
}

TEST(Psi, ConstantInputGivesConstantOutput) {
    const FeatureMap f(12, 24, 4, 0.3f);
    const BlockParams bp = random_block(4, 2);
    const FeatureMap out = psi_forward(f, bp.attn, build_index_map_fast(tpl(12, 24, 4)));
    for (std::size_t p = 1; p < out.pixel_count(); ++p) {
        for (int c = 0; c < 4; ++c) {
            ASSERT_NEAR(out.pixel(p)[c], out.pixel(0)[c], 1e-6);
        }
    }
}

TEST(Psi, EquatorMatchesRegularWindowsPolesDiffer) {
    Gen gen(55);
    const FeatureMap f = gen.features(12, 24, 4);
    const BlockParams bp = random_block(4, 3);
    AttentionStats stats;
    const FeatureMap swt = psi_forward(f, bp.attn, build_index_map_fast(tpl(12, 24, 4)), 1, &stats);
    const FeatureMap flat = psi_forward(f, bp.attn, identity_index_map(tpl(12, 24, 4)));
    EXPECT_TRUE(swt.all_finite());
    EXPECT_LE(stats.max_row_sum_error, 1e-6);
    double equator = 0;
    double polar = 0;
    for (int r = 0; r < 12; ++r) {
        for (int c = 0; c < 24; ++c) {
            for (int ch = 0; ch < 4; ++ch) {
                const double d = std::abs(double(swt.at(r, c, ch)) - flat.at(r, c, ch));
                double& worst = (r >= 4 && r < 8) ? equator : polar;
                worst = std::max(worst, d);
            }
        }
    }
    EXPECT_LE(equator, 1e-5);
    EXPECT_GT(polar, 1e-4);
}

TEST(Psi, RejectsMismatches) {
    const BlockParams bp = random_block(4, 4);
    EXPECT_THROW(psi_forward(FeatureMap(8, 16, 4), bp.attn, build_index_map_fast(tpl(12, 24, 4))), ShapeError);
    EXPECT_THROW(psi_forward(FeatureMap(12, 24, 8), bp.attn, build_index_map_fast(tpl(12, 24, 4))), ShapeError);
    EXPECT_THROW(psi_forward(FeatureMap(16, 32, 4), bp.attn, build_index_map_fast({4, 4, 2, ErpGridSpec(16, 32)})),
                 ShapeError);
}

TEST(Block, ZeroParametersAreIdentity) {
    Gen gen(56);
    const FeatureMap f = gen.features(16, 32, 8);
    const FeatureMap out = sfcrf_block(f, zero_block_params(8, 2, 4), build_index_map_fast(tpl(16, 32, 4)));
    EXPECT_LE(max_abs_diff(out, f), 1e-6);
}

TEST(Block, PreservesShapeAndComposes) {
    Gen gen(57);
    const FeatureMap f = gen.features(16, 32, 8);
    const IndexMap map = build_index_map_fast(tpl(16, 32, 4));
    const FeatureMap once = sfcrf_block(f, random_block(8, 5, true), map);
    EXPECT_TRUE(once.same_shape(f));
    const FeatureMap twice = sfcrf_block(once, random_block(8, 6, true), map);
    EXPECT_TRUE(twice.same_shape(f));
    EXPECT_TRUE(twice.all_finite());
    EXPECT_GT(max_abs_diff(twice, f), 0.0);
}

TEST(Block, ThreadCountIsBitExact) {
    Gen gen(58);
    const FeatureMap f = gen.features(16, 32, 8);
    const IndexMap map = build_index_map_fast(tpl(16, 32, 4));
    const BlockParams bp = random_block(8, 7, true);
    const FeatureMap ref = sfcrf_block(f, bp, map, 1);
    EXPECT_EQ(sfcrf_block(f, bp, map, 4), ref);
}

TEST(Upsample, NearestAndBilinear) {
    Gen gen(59);
    const FeatureMap f = gen.features(2, 3, 2);
    const FeatureMap n = upsample_nearest2x(f);
    EXPECT_EQ(n.height(), 4);
    EXPECT_EQ(n.at(3, 5, 1), f.at(1, 2, 1));
    const FeatureMap c = upsample_bilinear(FeatureMap(3, 4, 1, 2.5f), 4);
    EXPECT_EQ(c.height(), 12);
    for (float v : c.values()) {
        ASSERT_FLOAT_EQ(v, 2.5f);
    }
    // A linear ramp along rows is reproduced away from the clamped border.
    FeatureMap ramp(4, 2, 1);
    for (int r = 0; r < 4; ++r) {
        ramp.at(r, 0, 0) = ramp.at(r, 1, 0) = static_cast<float>(r);
    }
    const FeatureMap up = upsample_bilinear(ramp, 2);
    EXPECT_FLOAT_EQ(up.at(3, 0, 0), 1.25f); // source row (3 + 0.5) / 2 - 0.5 = 1.25
}

TEST(Decoder, PositiveFullResolutionOutput) {
    DecoderConfig cfg;
    cfg.seed = 3;
    const auto pyramid = random_pyramid(64, 128, cfg, 11);
    ASSERT_EQ(pyramid.size(), 4u);
    EXPECT_EQ(pyramid[3].height(), 2);
    EXPECT_EQ(pyramid[3].width(), 4);
    const DecoderParams params = init_decoder_params(cfg);
    const FeatureMap depth = decoder_forward(pyramid, cfg, params);
    EXPECT_EQ(depth.height(), 64);
    EXPECT_EQ(depth.width(), 128);
    EXPECT_EQ(depth.channels(), 1);
    for (float v : depth.values()) {
        ASSERT_GT(v, 0.0f);
    }
}

TEST(Decoder, DeterministicAcrossRunsAndThreads) {
    DecoderConfig cfg;
    cfg.seed = 9;
    const auto pyramid = random_pyramid(64, 128, cfg, 9);
    const FeatureMap a = decoder_forward(pyramid, cfg, init_decoder_params(cfg));
    const FeatureMap b = decoder_forward(pyramid, cfg, init_decoder_params(cfg));
    EXPECT_EQ(a, b);
    EXPECT_EQ(decoder_forward(pyramid, cfg, init_decoder_params(cfg), {3, true}), a);
}

TEST(Decoder, TransformParticipates) {
    DecoderConfig cfg;
    cfg.seed = 4;
    const auto pyramid = random_pyramid(64, 128, cfg, 4);
    const DecoderParams params = init_decoder_params(cfg);
    const FeatureMap spherical = decoder_forward(pyramid, cfg, params, {1, true});
    const FeatureMap planar = decoder_forward(pyramid, cfg, params, {1, false});
    EXPECT_GT(max_abs_diff(spherical, planar), 0.0);
}

TEST(Decoder, RejectsInconsistentPyramid) {
    DecoderConfig cfg;
    auto pyramid = random_pyramid(64, 128, cfg, 1);
    const DecoderParams params = init_decoder_params(cfg);
    pyramid[2] = FeatureMap(3, 8, 64);
    EXPECT_THROW(decoder_forward(pyramid, cfg, params), ShapeError);
    pyramid.pop_back();
    EXPECT_THROW(decoder_forward(pyramid, cfg, params), ShapeError);
    EXPECT_THROW(random_pyramid(60, 128, cfg, 1), ShapeError);
    cfg.channels = {16, 32};
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ParamBundle, RoundTrip) {
    DecoderConfig cfg;
    cfg.levels = 2;
    cfg.channels = {8, 16};
    cfg.seed = 77;
    cfg.expansion = 2;
    const DecoderParams params = init_decoder_params(cfg);
    test::TempDir dir("bundle");
    save_decoder_params(params, cfg, dir.path());
    const auto [loaded, loaded_cfg] = load_decoder_params(dir.path());
    EXPECT_EQ(loaded_cfg, cfg);
    EXPECT_EQ(loaded, params);
}

TEST(ParamBundle, MissingPiecesAreReported) {
    DecoderConfig cfg;
    cfg.levels = 1;
    cfg.channels = {4};
    test::TempDir dir("bundle_bad");
    save_decoder_params(init_decoder_params(cfg), cfg, dir.path());
    std::filesystem::remove(dir / "head.weight.fmap");
    EXPECT_THROW(load_decoder_params(dir.path()), IoError);
    EXPECT_THROW(load_decoder_params(dir / "missing"), IoError);

    std::ofstream(dir / "manifest.txt") << "seed = 1\nlevels = 1\nwindow = 4\nchannels = 4\nexpansion = 4\nheads = 0\n";
    EXPECT_THROW(load_decoder_params(dir.path()), FormatError);
    std::ofstream(dir / "manifest.txt") << "seed = x\n";
    EXPECT_THROW(load_decoder_params(dir.path()), FormatError);
}

} // namespace
} // namespace swt
