#include "gridga/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "gridga/error.hpp"
#include "gridga/random.hpp"

namespace gridga {

namespace {

double softplus(double z) noexcept {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) noexcept {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

LossAndGradient logistic_loss(const Matrix& Z, std::span<const std::uint8_t> y, std::span<const double> w,
                              double b, double l2) {
    const std::size_t n = Z.rows();
    const std::size_t d = Z.cols();
    if (y.size() != n || w.size() != d) throw Error(ErrorKind::usage, "logistic_loss: shape mismatch");

    std::vector<double> margin(n, b);
    for (std::size_t j = 0; j < d; ++j) {
        const auto col = Z.column(j);
        for (std::size_t i = 0; i < n; ++i) margin[i] += w[j] * col[i];
    }

    LossAndGradient out;
    out.grad_w.assign(d, 0.0);
    std::vector<double> residual(n);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loss += softplus(margin[i]) - (y[i] ? margin[i] : 0.0);
        residual[i] = sigmoid(margin[i]) - (y[i] ? 1.0 : 0.0);
        out.grad_b += residual[i];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double penalty = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const auto col = Z.column(j);
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += residual[i] * col[i];
        out.grad_w[j] = g * inv_n + l2 * w[j];
        penalty += w[j] * w[j];
    }
    out.loss = loss * inv_n + 0.5 * l2 * penalty;
    out.grad_b *= inv_n;
    return out;
}

LinearModel train_logistic(const ColumnView& X, std::span<const std::uint8_t> y, const LogisticConfig& cfg) {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    if (y.size() != n) throw Error(ErrorKind::usage, "train_logistic: label length mismatch");
    if (n < 2) throw Error(ErrorKind::training, "logistic regression needs at least 2 samples");
    const auto pos = std::count(y.begin(), y.end(), std::uint8_t{1});
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(n))
        throw Error(ErrorKind::training, "logistic regression training data contains a single class");
    if (!(cfg.learning_rate > 0.0) || cfg.l2 < 0.0)
        throw Error(ErrorKind::config, "logistic: learning_rate must be > 0 and l2 >= 0");

    LinearModel model;
    model.mean.assign(d, 0.0);
    model.scale.assign(d, 1.0);
    Matrix Z(n, d);
    for (std::size_t j = 0; j < d; ++j) {
        const auto col = X.column(j);
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        if (!std::isfinite(mean) || !std::isfinite(sd))
            throw Error(ErrorKind::usage, "logistic: non-finite feature values");
        model.mean[j] = mean;
        model.scale[j] = sd > 0.0 ? sd : 1.0;
        auto z = Z.column(j);
        for (std::size_t i = 0; i < n; ++i) z[i] = (col[i] - mean) / model.scale[j];
    }

    Rng rng(derive_seed(cfg.seed, 0));
    model.weights.resize(d);
    for (auto& w : model.weights) w = 0.01 * (2.0 * uniform01(rng) - 1.0);
    model.bias = 0.0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto g = logistic_loss(Z, y, model.weights, model.bias, cfg.l2);
        if (!std::isfinite(g.loss))
            throw Error(ErrorKind::divergence, "logistic loss became non-finite; lower the learning rate");
        double norm2 = g.grad_b * g.grad_b;
        for (double v : g.grad_w) norm2 += v * v;
        if (norm2 < 1e-24) break;
        for (std::size_t j = 0; j < d; ++j) model.weights[j] -= cfg.learning_rate * g.grad_w[j];
        model.bias -= cfg.learning_rate * g.grad_b;
    }
    model.final_loss = logistic_loss(Z, y, model.weights, model.bias, cfg.l2).loss;
    if (!std::isfinite(model.final_loss))
        throw Error(ErrorKind::divergence, "logistic loss became non-finite; lower the learning rate");
    return model;
}

std::vector<double> LinearModel::predict_proba(const ColumnView& X) const {
    if (X.cols() != weights.size())
        throw Error(ErrorKind::usage, "logistic model expects " + std::to_string(weights.size()) + " features");
    std::vector<double> z(X.rows(), bias);
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const auto col = X.column(j);
        for (std::size_t i = 0; i < X.rows(); ++i) z[i] += weights[j] * (col[i] - mean[j]) / scale[j];
    }
    for (auto& v : z) v = sigmoid(v);
    return z;
}

}  // namespace gridga
