#pragma once

#include <cstdint>
#include <span>

namespace gridga {

/// Attack (label 1) is the positive class.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;
    double precision_pos = 0.0;
    double recall_pos = 0.0;
    double f1_pos = 0.0;
    double recall_neg = 0.0;
    double f1_neg = 0.0;
    double macro_f1 = 0.0;
    double roc_auc = 0.0;
    double threshold = 0.5;
};

ConfusionCounts confusion(std::span<const std::uint8_t> y_true, std::span<const std::uint8_t> y_pred);

/// Everything but roc_auc and threshold. 0/0 ratios are 0.
MetricsReport classification_metrics(const ConfusionCounts& c);

/// Mann-Whitney statistic: share of (pos, neg) pairs ranked correctly, ties
/// counting one half. O(n log n).
double roc_auc(std::span<const std::uint8_t> y_true, std::span<const double> scores);

/// Macro-F1 of the rule `score >= threshold`.
double macro_f1_at(std::span<const std::uint8_t> y_true, std::span<const double> scores,
                   double threshold);

/// Threshold maximizing validation macro-F1. Candidates: midpoints of
/// consecutive distinct sorted scores plus {0, 0.5, 1}. Ties go to the
/// candidate nearest 0.5, then to the smaller one.
double select_threshold(std::span<const std::uint8_t> y_true, std::span<const double> scores);

/// Full report for `score >= threshold`, including ROC-AUC.
MetricsReport evaluate_scores(std::span<const std::uint8_t> y_true, std::span<const double> scores,
                              double threshold);

}  // namespace gridga
