#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gridga/harness/config.hpp"
#include "gridga/metrics.hpp"

namespace gridga::harness {

struct ResultRow {
    ModelKind model = ModelKind::extra_trees;
    FeatureSet feature_set = FeatureSet::all;
    std::size_t n_features = 0;
    MetricsReport metrics;
    ConfusionCounts confusion;
    double seconds = 0.0;
    std::uint64_t seed = 0;
};

Dataset load_dataset(const ExperimentConfig& cfg);

/// Train on the train part, pick the threshold on validation, report on test.
ResultRow evaluate_model(ModelKind model, FeatureSet set, const PreparedSplits& splits,
                         const ExperimentConfig& cfg);

/// Every (model, feature set) pair of the config, sorted by (model, set).
std::vector<ResultRow> run_baselines(const ExperimentConfig& cfg, const Dataset& ds);

/// Tree models of the roster over all three feature sets.
std::vector<ResultRow> run_ablation(const ExperimentConfig& cfg, const Dataset& ds);

struct GaRun {
    std::uint64_t seed = 0;
    GaResult result;
    double seconds = 0.0;
};

struct GaSummaryRow {
    double n_selected = 0.0;
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;
    double f1 = 0.0;
    double macro_f1 = 0.0;
    double roc_auc = 0.0;
};

struct GaStudy {
    FeatureSet feature_set = FeatureSet::pmu_without_status;
    std::size_t n_features = 0;
    std::vector<GaRun> runs;
    GaSummaryRow mean;
    GaSummaryRow std;  // sample standard deviation; 0 with a single run
    ResultRow full_feature;  // Extra Trees on all columns of the same set
};

GaSummaryRow summary_of(const GaRun& run);
void aggregate(GaStudy& study);

/// One run_ga per seed. `on_run` is called after each seed finishes so
/// partial results can be persisted if a later seed fails.
GaStudy run_ga_study(const ExperimentConfig& cfg, const Dataset& ds,
                     const std::function<void(const GaStudy&)>& on_run = {});

}  // namespace gridga::harness
