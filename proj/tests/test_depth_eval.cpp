#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <cmath>
#include <nlohmann/json.hpp>

#include "support.hpp"
#include "swt/depth_eval.hpp"
#include "swt/error.hpp"

namespace swt {
namespace {

using test::Gen;

// Long-double reference of the metric formulas.
struct Reference {
    long double abs_rel = 0, sq_rel = 0, rmse = 0, d1 = 0, d2 = 0, d3 = 0;
};

Reference reference_metrics(const std::vector<double>& pred, const std::vector<double>& gt) {
    Reference r;
    std::size_t k = 0;
    long double sq = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (gt[i] <= 0) {
            continue;
        }
        ++k;
        const long double p = pred[i];
        const long double g = gt[i];
        r.abs_rel += std::fabs(p - g) / g;
        r.sq_rel += (p - g) * (p - g) / g;
        sq += (p - g) * (p - g);
        const long double ratio = std::max(p / g, g / p);
        r.d1 += ratio < 1.25L;
        r.d2 += ratio < 1.5625L;
        r.d3 += ratio < 1.953125L;
    }
    r.abs_rel /= k;
    r.sq_rel /= k;
    r.rmse = std::sqrt(sq / k);
    r.d1 /= k;
    r.d2 /= k;
    r.d3 /= k;
    return r;
}

std::vector<float> tens(int n) {
    std::vector<float> v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = 10.0f * (i + 1);
    }
    return v;
}

TEST(Median, OddEvenAndEmpty) {
    EXPECT_EQ(median(std::vector<double>{3, 1, 2}), 2.0);
    EXPECT_EQ(median(std::vector<double>{4, 1, 3, 2}), 2.5);
    EXPECT_THROW(median(std::vector<double>{}), EmptyMaskError);
}

TEST(PairwiseSum, MatchesExactSmallSums) {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = static_cast<double>(i);
    }
    EXPECT_EQ(pairwise_sum(v), 999.0 * 1000 / 2);
    EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(DepthPair, MaskAndValidation) {
    const std::vector<float> pred{1, 2, 3, 4};
    const std::vector<float> gt{0, 2, 0, 5};
    const DepthPair p(pred, gt);
    EXPECT_EQ(p.observed(), 2u);
    EXPECT_EQ(p.prediction()[1], 4.0);
    EXPECT_EQ(DepthPair(pred, gt, 2.5).observed(), 1u);
    EXPECT_THROW(DepthPair(pred, std::vector<float>{1, 2}), ShapeError);
    EXPECT_THROW(DepthPair(std::vector<float>{NAN}, std::vector<float>{1}), DomainError);
    EXPECT_THROW(DepthPair(FeatureMap(2, 2, 1), FeatureMap(2, 1, 1)), ShapeError);
}

TEST(Evaluate, PerfectPrediction) {
    const auto gt = tens(16);
    const DepthMetrics m = evaluate(DepthPair(gt, gt), false);
    EXPECT_EQ(m.abs_rel, 0.0);
    EXPECT_EQ(m.sq_rel, 0.0);
    EXPECT_EQ(m.rmse, 0.0);
    EXPECT_EQ(m.delta1, 1.0);
    EXPECT_EQ(m.delta2, 1.0);
    EXPECT_EQ(m.delta3, 1.0);
    EXPECT_EQ(m.observed, 16u);
}

TEST(Evaluate, UniformOverestimate) {
    // 4x4 fixture with gt in multiples of 10 so 1.3 * gt is exact in float.
    const auto gt = tens(16);
    std::vector<float> pred(16);
    std::transform(gt.begin(), gt.end(), pred.begin(), [](float g) { return g * 13 / 10; });
    const DepthMetrics m = evaluate(DepthPair(pred, gt), false);
    const Reference ref = reference_metrics({pred.begin(), pred.end()}, {gt.begin(), gt.end()});
    EXPECT_NEAR(m.abs_rel, 0.3, 1e-12);
    EXPECT_NEAR(m.sq_rel, static_cast<double>(ref.sq_rel), 1e-12);
    EXPECT_NEAR(m.rmse, static_cast<double>(ref.rmse), 1e-12);
    EXPECT_EQ(m.delta1, 0.0);
    EXPECT_EQ(m.delta2, 1.0);
    EXPECT_EQ(m.delta3, 1.0);
}

TEST(Evaluate, AlignmentCancelsUniformScale) {
    const auto gt = tens(16);
    std::vector<float> pred(16);
    std::transform(gt.begin(), gt.end(), pred.begin(), [](float g) { return 2 * g; });
    const DepthMetrics m = evaluate(DepthPair(pred, gt), true);
    EXPECT_TRUE(m.aligned);
    EXPECT_EQ(m.scale, 0.5);
    EXPECT_EQ(m.abs_rel, 0.0);
    EXPECT_EQ(m.rmse, 0.0);
    EXPECT_EQ(m.delta1, 1.0);
}

TEST(Evaluate, MatchesReferenceOnRandomPairs) {
    Gen gen(61);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = gen.integer(1, 400);
        std::vector<double> pred(n), gt(n);
        for (int i = 0; i < n; ++i) {
            pred[i] = gen.uniform(0.1, 10);
            gt[i] = gen.uniform(0, 1) < 0.2 ? 0.0 : gen.uniform(0.1, 10);
        }
        if (std::count(gt.begin(), gt.end(), 0.0) == n) {
            continue;
        }
        const DepthMetrics m = evaluate(DepthPair(pred, gt), false);
        const Reference r = reference_metrics(pred, gt);
        ASSERT_NEAR(m.abs_rel, static_cast<double>(r.abs_rel), 1e-12 * (1 + m.abs_rel));
        ASSERT_NEAR(m.sq_rel, static_cast<double>(r.sq_rel), 1e-12 * (1 + m.sq_rel));
        ASSERT_NEAR(m.rmse, static_cast<double>(r.rmse), 1e-12 * (1 + m.rmse));
        ASSERT_NEAR(m.delta1, static_cast<double>(r.d1), 1e-12);
        ASSERT_NEAR(m.delta2, static_cast<double>(r.d2), 1e-12);
        ASSERT_NEAR(m.delta3, static_cast<double>(r.d3), 1e-12);
        ASSERT_LE(m.delta1, m.delta2);
        ASSERT_LE(m.delta2, m.delta3);
    }
}

TEST(Evaluate, PermutationInvariant) {
    Gen gen(62);
    std::vector<double> pred(257), gt(257);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = gen.uniform(0.5, 5);
        gt[i] = gen.uniform(0.5, 5);
    }
    const DepthMetrics a = evaluate(DepthPair(pred, gt), true);
    std::vector<std::size_t> order(pred.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen.engine());
    std::vector<double> p2, g2;
    for (auto i : order) {
        p2.push_back(pred[i]);
        g2.push_back(gt[i]);
    }
    const DepthMetrics b = evaluate(DepthPair(p2, g2), true);
    EXPECT_NEAR(a.abs_rel, b.abs_rel, 1e-14);
    EXPECT_NEAR(a.rmse, b.rmse, 1e-14);
    EXPECT_EQ(a.scale, b.scale);
    EXPECT_EQ(a.delta1, b.delta1);
}

TEST(Evaluate, AlignmentEqualizesMedians) {
    Gen gen(63);
    std::vector<double> pred(101), gt(101);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = gen.uniform(0.5, 5);
        gt[i] = gen.uniform(0.5, 5);
    }
    const DepthMetrics m = evaluate(DepthPair(pred, gt), true);
    std::vector<double> scaled(pred);
    for (double& p : scaled) {
        p *= m.scale;
    }
    EXPECT_NEAR(median(scaled), median(gt), 1e-15 * median(gt) * 4);
}

TEST(Evaluate, Errors) {
    const std::vector<float> zeros(4, 0.0f);
    const std::vector<float> ones(4, 1.0f);
    EXPECT_THROW(evaluate(DepthPair(ones, zeros), false), EmptyMaskError);
    EXPECT_THROW(evaluate(DepthPair(zeros, ones), true), DegenerateScaleError);
}

TEST(Silog, ZeroAtPerfectPrediction) {
    const auto gt = tens(9);
    EXPECT_EQ(silog(DepthPair(gt, gt)), 0.0);
}

TEST(Silog, SinglePixelClosedForm) {
    const std::vector<double> gt{2.0};
    const std::vector<double> pred{2.0 * std::exp(1.0)};
    EXPECT_NEAR(silog(DepthPair(pred, gt)), 10 * std::sqrt(0.15), 1e-9);
}

TEST(Silog, FullScaleInvarianceWithUnitLambda) {
    Gen gen(64);
    std::vector<double> pred(200), gt(200), scaled(200);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = gen.uniform(0.5, 5);
        gt[i] = gen.uniform(0.5, 5);
        scaled[i] = pred[i] * 3.7;
    }
    const double a = silog(DepthPair(pred, gt), 10, 1.0);
    const double b = silog(DepthPair(scaled, gt), 10, 1.0);
    EXPECT_NEAR(a, b, 1e-9 * a);
}

TEST(Silog, RejectsNonPositive) {
    EXPECT_THROW(silog(DepthPair(std::vector<double>{0.0}, std::vector<double>{1.0})), DomainError);
    EXPECT_THROW(silog(DepthPair(std::vector<double>{1.0}, std::vector<double>{0.0})), EmptyMaskError);
}

TEST(Report, TextAndJson) {
    const auto gt = tens(4);
    const DepthMetrics m = evaluate(DepthPair(gt, gt), false);
    EXPECT_NE(metrics_text(m).find("abs_rel 0\n"), std::string::npos);
    const auto j = nlohmann::json::parse(metrics_json(m));
    EXPECT_EQ(j.at("delta1").get<double>(), 1.0);
    EXPECT_EQ(j.at("observed").get<int>(), 4);
}

} // namespace
} // namespace swt
