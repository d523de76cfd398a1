#include "gridga/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gridga/error.hpp"

namespace gridga {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Harmonic mean of precision and recall written in counts; 0 when tp = 0.
double f1(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) noexcept {
    return ratio(2 * tp, 2 * tp + fp + fn);
}

double macro_f1_of(const ConfusionCounts& c) noexcept {
    return (f1(c.tp, c.fp, c.fn) + f1(c.tn, c.fn, c.fp)) / 2.0;
}

void require_both_classes(std::span<const std::uint8_t> y, const char* what) {
    const auto pos = std::count(y.begin(), y.end(), std::uint8_t{1});
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size()))
        throw Error(ErrorKind::metric_undefined, std::string(what) + " needs both classes present");
}

}  // namespace

ConfusionCounts confusion(std::span<const std::uint8_t> y_true, std::span<const std::uint8_t> y_pred) {
    if (y_true.size() != y_pred.size())
        throw Error(ErrorKind::usage, "confusion: label and prediction lengths differ");
    if (y_true.empty()) throw Error(ErrorKind::usage, "confusion: empty input");
    ConfusionCounts c;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool t = y_true[i] != 0;
        const bool p = y_pred[i] != 0;
        if (t && p) ++c.tp;
        else if (!t && p) ++c.fp;
        else if (!t && !p) ++c.tn;
        else ++c.fn;
    }
    return c;
}

MetricsReport classification_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw Error(ErrorKind::usage, "classification_metrics: no samples");
    MetricsReport r;
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.precision_pos = ratio(c.tp, c.tp + c.fp);
    r.recall_pos = ratio(c.tp, c.tp + c.fn);
    r.recall_neg = ratio(c.tn, c.tn + c.fp);
    r.f1_pos = f1(c.tp, c.fp, c.fn);
    r.f1_neg = f1(c.tn, c.fn, c.fp);
    r.macro_f1 = (r.f1_pos + r.f1_neg) / 2.0;
    r.balanced_accuracy = (r.recall_pos + r.recall_neg) / 2.0;
    return r;
}

double roc_auc(std::span<const std::uint8_t> y_true, std::span<const double> scores) {
    if (y_true.size() != scores.size()) throw Error(ErrorKind::usage, "roc_auc: length mismatch");
    require_both_classes(y_true, "ROC-AUC");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sweep groups of tied scores in ascending order. Twice the U statistic
    // is an integer, so the sum is exact.
    std::uint64_t neg_below = 0;
    std::uint64_t twice_u = 0;
    std::uint64_t n_pos = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::uint64_t pos = 0;
        std::uint64_t neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (y_true[order[j]] ? pos : neg) += 1;
            ++j;
        }
        twice_u += pos * (2 * neg_below + neg);
        neg_below += neg;
        n_pos += pos;
        i = j;
    }
    const std::uint64_t n_neg = neg_below;
    return (static_cast<double>(twice_u) / 2.0) / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double macro_f1_at(std::span<const std::uint8_t> y_true, std::span<const double> scores, double threshold) {
    if (y_true.size() != scores.size()) throw Error(ErrorKind::usage, "macro_f1_at: length mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool p = scores[i] >= threshold;
        if (y_true[i]) (p ? c.tp : c.fn) += 1;
        else (p ? c.fp : c.tn) += 1;
    }
    return macro_f1_of(c);
}

double select_threshold(std::span<const std::uint8_t> y_true, std::span<const double> scores) {
    if (y_true.size() != scores.size()) throw Error(ErrorKind::usage, "select_threshold: length mismatch");
    require_both_classes(y_true, "threshold selection");

    // Sorted (score, label) pairs; positives-at-or-above counts come from a
    // suffix sum so every candidate costs one binary search.
    std::vector<std::pair<double, std::uint8_t>> pairs(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) pairs[i] = {scores[i], y_true[i] ? 1 : 0};
    std::sort(pairs.begin(), pairs.end());
    const std::size_t n = pairs.size();
    std::vector<std::uint64_t> pos_from(n + 1, 0);
    for (std::size_t i = n; i-- > 0;) pos_from[i] = pos_from[i + 1] + pairs[i].second;
    const std::uint64_t total_pos = pos_from[0];
    const std::uint64_t total_neg = n - total_pos;

    auto macro_at = [&](double t) {
        const auto first = static_cast<std::size_t>(
            std::lower_bound(pairs.begin(), pairs.end(), t, [](const auto& p, double v) { return p.first < v; }) -
            pairs.begin());
        ConfusionCounts c;
        c.tp = pos_from[first];
        c.fp = (n - first) - c.tp;
        c.fn = total_pos - c.tp;
        c.tn = total_neg - c.fp;
        return macro_f1_of(c);
    };

    std::vector<double> candidates{0.0, 0.5, 1.0};
    for (std::size_t i = 1; i < n; ++i)
        if (pairs[i].first != pairs[i - 1].first)
            candidates.push_back(pairs[i - 1].first + (pairs[i].first - pairs[i - 1].first) / 2.0);

    double best_t = 0.5;
    double best_f1 = -1.0;
    for (double t : candidates) {
        const double m = macro_at(t);
        const double dist = std::abs(t - 0.5);
        const double best_dist = std::abs(best_t - 0.5);
        if (m > best_f1 || (m == best_f1 && (dist < best_dist || (dist == best_dist && t < best_t)))) {
            best_f1 = m;
            best_t = t;
        }
    }
    return best_t;
}

MetricsReport evaluate_scores(std::span<const std::uint8_t> y_true, std::span<const double> scores,
                              double threshold) {
    if (y_true.size() != scores.size()) throw Error(ErrorKind::usage, "evaluate_scores: length mismatch");
    std::vector<std::uint8_t> pred(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] >= threshold ? 1 : 0;
    MetricsReport r = classification_metrics(confusion(y_true, pred));
    r.roc_auc = roc_auc(y_true, scores);
    r.threshold = threshold;
    return r;
}

}  // namespace gridga
