#include "swt/depth_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <string>

#include "swt/error.hpp"

namespace swt {

template <typename T>
void DepthPair::init(std::span<const T> prediction, std::span<const T> ground_truth, double min_gt) {
    if (prediction.size() != ground_truth.size()) {
        throw ShapeError("prediction has " + std::to_string(prediction.size()) + " pixels, ground truth has " +
                         std::to_string(ground_truth.size()));
    }
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        if (!std::isfinite(prediction[i]) || !std::isfinite(ground_truth[i])) {
            throw DomainError("non-finite depth at pixel " + std::to_string(i));
        }
        if (ground_truth[i] > min_gt) {
            pred_.push_back(prediction[i]);
            gt_.push_back(ground_truth[i]);
        }
    }
}

DepthPair::DepthPair(std::span<const float> prediction, std::span<const float> ground_truth, double min_gt) {
    init(prediction, ground_truth, min_gt);
}

DepthPair::DepthPair(std::span<const double> prediction, std::span<const double> ground_truth, double min_gt) {
    init(prediction, ground_truth, min_gt);
}

DepthPair::DepthPair(const FeatureMap& prediction, const FeatureMap& ground_truth, double min_gt)
    : DepthPair(prediction.values(), ground_truth.values(), min_gt) {
    if (prediction.channels() != 1 || !prediction.same_shape(ground_truth)) {
        throw ShapeError("depth maps must be single-channel and equally sized");
    }
}

double median(std::span<const double> values) {
    if (values.empty()) {
        throw EmptyMaskError("median of an empty set");
    }
    std::vector<double> v(values.begin(), values.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

double pairwise_sum(std::span<const double> values) noexcept {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

DepthMetrics evaluate(const DepthPair& pair, bool align) {
    const std::size_t k = pair.observed();
    if (k == 0) {
        throw EmptyMaskError("no observed ground-truth pixels");
    }
    const auto gt = pair.ground_truth();
    std::vector<double> pred(pair.prediction().begin(), pair.prediction().end());

    DepthMetrics m;
    m.observed = k;
    m.aligned = align;
    if (align) {
        const double med_pred = median(pred);
        if (!(med_pred > 0.0)) {
            throw DegenerateScaleError("median of the prediction is not positive");
        }
        m.scale = median(gt) / med_pred;
        for (double& p : pred) {
            p *= m.scale;
        }
    }

    std::vector<double> abs_rel(k), sq_rel(k), sq(k), d1(k), d2(k), d3(k);
    constexpr double t1 = 1.25;
    constexpr double t2 = 1.25 * 1.25;
    constexpr double t3 = 1.25 * 1.25 * 1.25;
    for (std::size_t i = 0; i < k; ++i) {
        const double diff = pred[i] - gt[i];
        abs_rel[i] = std::abs(diff) / gt[i];
        sq_rel[i] = diff * diff / gt[i];
        sq[i] = diff * diff;
        const double ratio = std::max(pred[i] / gt[i], gt[i] / pred[i]);
        d1[i] = ratio < t1 ? 1.0 : 0.0;
        d2[i] = ratio < t2 ? 1.0 : 0.0;
        d3[i] = ratio < t3 ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(k);
    m.abs_rel = pairwise_sum(abs_rel) / n;
    m.sq_rel = pairwise_sum(sq_rel) / n;
    m.rmse = std::sqrt(pairwise_sum(sq) / n);
    m.delta1 = pairwise_sum(d1) / n;
    m.delta2 = pairwise_sum(d2) / n;
    m.delta3 = pairwise_sum(d3) / n;
    return m;
}

double silog(const DepthPair& pair, double alpha, double lambda) {
    const std::size_t k = pair.observed();
    if (k == 0) {
        throw EmptyMaskError("no observed ground-truth pixels");
    }
    const auto pred = pair.prediction();
    const auto gt = pair.ground_truth();
    std::vector<double> d(k), d2(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (!(pred[i] > 0.0) || !(gt[i] > 0.0)) {
            throw DomainError("SILog needs strictly positive depths on observed pixels");
        }
        d[i] = std::log(pred[i]) - std::log(gt[i]);
        d2[i] = d[i] * d[i];
    }
    const double n = static_cast<double>(k);
    const double sum = pairwise_sum(d);
    const double radicand = pairwise_sum(d2) / n - lambda * (sum * sum) / (n * n);
    return alpha * std::sqrt(std::max(0.0, radicand));
}

std::string metrics_text(const DepthMetrics& m) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "observed %zu\naligned %s\nscale %.10g\nabs_rel %.10g\nsq_rel %.10g\nrmse %.10g\n"
                  "delta1 %.10g\ndelta2 %.10g\ndelta3 %.10g\n",
                  m.observed, m.aligned ? "yes" : "no", m.scale, m.abs_rel, m.sq_rel, m.rmse, m.delta1, m.delta2,
                  m.delta3);
    return buf;
}

std::string metrics_json(const DepthMetrics& m) {
    const nlohmann::json j = {{"observed", m.observed}, {"aligned", m.aligned}, {"scale", m.scale},
                              {"abs_rel", m.abs_rel},   {"sq_rel", m.sq_rel},   {"rmse", m.rmse},
                              {"delta1", m.delta1},     {"delta2", m.delta2},   {"delta3", m.delta3}};
    return j.dump(2) + "\n";
}

} // namespace swt
