#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gridga/matrix.hpp"

namespace gridga {

struct LogisticConfig {
    std::size_t epochs = 500;
    double learning_rate = 0.5;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
};

/// Standardized linear model: p = sigmoid(w . (x - mean) / scale + bias).
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> mean;
    std::vector<double> scale;  // 1 for zero-variance features
    double final_loss = 0.0;

    std::vector<double> predict_proba(const ColumnView& X) const;
    std::vector<double> predict_proba(const Matrix& X) const { return predict_proba(ColumnView(X)); }
};

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

/// Mean log-loss plus (l2/2)*||w||^2 and its gradient, on already
/// standardized inputs.
LossAndGradient logistic_loss(const Matrix& Z, std::span<const std::uint8_t> y,
                              std::span<const double> w, double b, double l2);

/// Full-batch gradient descent. Throws Error(training) on single-class data
/// and Error(divergence) on a non-finite loss.
LinearModel train_logistic(const ColumnView& X, std::span<const std::uint8_t> y,
                           const LogisticConfig& cfg);
inline LinearModel train_logistic(const Matrix& X, std::span<const std::uint8_t> y,
                                  const LogisticConfig& cfg) {
    return train_logistic(ColumnView(X), y, cfg);
}

}  // namespace gridga
