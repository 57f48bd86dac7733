#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "swt/feature_map.hpp"

namespace swt {

/// Prediction and ground truth restricted to observed pixels. A pixel is
/// observed when its ground truth exceeds `min_gt` (default: exactly zero
/// marks unobserved).
class DepthPair {
public:
    DepthPair(std::span<const float> prediction, std::span<const float> ground_truth, double min_gt = 0.0);
    DepthPair(std::span<const double> prediction, std::span<const double> ground_truth, double min_gt = 0.0);
    DepthPair(const FeatureMap& prediction, const FeatureMap& ground_truth, double min_gt = 0.0);

    std::size_t observed() const noexcept { return pred_.size(); } // K
    std::span<const double> prediction() const noexcept { return pred_; }
    std::span<const double> ground_truth() const noexcept { return gt_; }

private:
    template <typename T>
    void init(std::span<const T> prediction, std::span<const T> ground_truth, double min_gt);

    std::vector<double> pred_;
    std::vector<double> gt_;
};

struct DepthMetrics {
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double rmse = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    bool aligned = false;
    double scale = 1.0; // median ratio applied when aligned
    std::size_t observed = 0;
};

/// Mean of the two middle values for even counts.
double median(std::span<const double> values);

/// Pairwise (cascade) summation; fixed order for a given input order.
double pairwise_sum(std::span<const double> values) noexcept;

/// Abs Rel, Sq Rel, RMSE and delta thresholds 1.25^m over observed pixels,
/// optionally after scaling the prediction by median(gt) / median(pred).
DepthMetrics evaluate(const DepthPair& pair, bool align);

/// Scale-invariant log loss: alpha * sqrt(mean(d^2) - lambda * mean(d)^2),
/// d = log(pred) - log(gt); the radicand is clamped at zero.
double silog(const DepthPair& pair, double alpha = 10.0, double lambda = 0.85);

std::string metrics_text(const DepthMetrics& m);
std::string metrics_json(const DepthMetrics& m);

} // namespace swt
