#include "gridga/harness/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

#include "gridga/error.hpp"
#include "gridga/logistic.hpp"

namespace gridga::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

ForestConfig forest_for(ModelKind model, const ExperimentConfig& cfg) {
    ForestConfig f = model == ModelKind::random_forest ? cfg.random_forest : cfg.extra_trees;
    f.n_threads = cfg.threads;
    return f;
}

// Prefixes errors with the (model, feature set) pair that raised them.
template <typename F>
auto annotated(ModelKind model, FeatureSet set, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(to_string(model)) + "/" + to_string(set) + ": " + e.what());
    }
}

bool row_order(const ResultRow& a, const ResultRow& b) {
    if (a.model != b.model) return a.model < b.model;
    return a.feature_set < b.feature_set;
}

std::vector<ResultRow> run_pairs(const ExperimentConfig& cfg, const Dataset& ds, std::vector<ModelKind> models,
                                 std::vector<FeatureSet> sets) {
    std::sort(models.begin(), models.end());
    models.erase(std::unique(models.begin(), models.end()), models.end());
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());

    std::vector<ResultRow> rows;
    for (auto set : sets) {
        const auto splits = annotated(models.front(), set, [&] {
            return prepare_splits(select_feature_set(ds, set), cfg.fractions, cfg.split_seed);
        });
        for (auto model : models)
            rows.push_back(annotated(model, set, [&] { return evaluate_model(model, set, splits, cfg); }));
    }
    std::sort(rows.begin(), rows.end(), row_order);
    return rows;
}

}  // namespace

Dataset load_dataset(const ExperimentConfig& cfg) {
    if (cfg.data.kind == DataSource::Kind::synthetic) return generate_synthetic(cfg.data.synthetic);

    std::vector<std::filesystem::path> files = cfg.data.files;
    if (!cfg.data.dir.empty()) {
        for (auto& f : files)
            if (f.is_relative()) f = cfg.data.dir / f;
        if (files.empty()) files = list_csv_files(cfg.data.dir);
    }
    if (files.empty()) throw Error(ErrorKind::io, "no CSV files found in " + cfg.data.dir.string());

    FeatureManifest manifest = FeatureManifest::msu_ornl_default();
    if (cfg.data.manifest) {
        manifest = FeatureManifest::load(*cfg.data.manifest);
    } else if (!cfg.data.dir.empty() && std::filesystem::exists(cfg.data.dir / "manifest.txt")) {
        manifest = FeatureManifest::load(cfg.data.dir / "manifest.txt");
    }
    CsvLoadOptions options;
    options.label_column = cfg.data.label_column;
    options.label_map = cfg.data.label_map;
    return load_csv(files, manifest, options);
}

ResultRow evaluate_model(ModelKind model, FeatureSet set, const PreparedSplits& splits,
                         const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    ResultRow row;
    row.model = model;
    row.feature_set = set;
    row.n_features = splits.train.n_features();

    const ColumnView train(splits.train.values());
    const ColumnView validation(splits.validation.values());
    const ColumnView test(splits.test.values());

    std::vector<double> val_scores;
    std::vector<double> test_scores;
    if (model == ModelKind::logistic) {
        const auto lm = train_logistic(train, splits.train.labels(), cfg.logistic);
        val_scores = lm.predict_proba(validation);
        test_scores = lm.predict_proba(test);
        row.seed = cfg.logistic.seed;
    } else {
        const ForestConfig f = forest_for(model, cfg);
        const std::array<ColumnView, 2> eval{validation, test};
        auto scores = train_and_score(train, splits.train.labels(), f, eval);
        val_scores = std::move(scores[0]);
        test_scores = std::move(scores[1]);
        row.seed = f.seed;
    }
    const double threshold = select_threshold(splits.validation.labels(), val_scores);
    row.metrics = evaluate_scores(splits.test.labels(), test_scores, threshold);
    row.confusion = confusion(splits.test.labels(), apply_threshold(test_scores, threshold));
    row.seconds = seconds_since(start);
    return row;
}

std::vector<ResultRow> run_baselines(const ExperimentConfig& cfg, const Dataset& ds) {
    cfg.validate(false);
    return run_pairs(cfg, ds, cfg.models, cfg.feature_sets);
}

std::vector<ResultRow> run_ablation(const ExperimentConfig& cfg, const Dataset& ds) {
    cfg.validate(false);
    std::vector<ModelKind> trees;
    for (auto m : cfg.models)
        if (m != ModelKind::logistic) trees.push_back(m);
    if (trees.empty()) throw Error(ErrorKind::config, "ablation needs a tree model in the roster");
    return run_pairs(cfg, ds, trees, {FeatureSet::all, FeatureSet::pmu_only, FeatureSet::pmu_without_status});
}

GaSummaryRow summary_of(const GaRun& run) {
    const auto& m = run.result.test_report;
    return {static_cast<double>(run.result.best_mask.popcount()), m.accuracy, m.balanced_accuracy, m.f1_pos,
            m.macro_f1, m.roc_auc};
}

void aggregate(GaStudy& study) {
    study.mean = {};
    study.std = {};
    const auto n = study.runs.size();
    if (n == 0) return;
    auto fields = [](GaSummaryRow& r) {
        return std::array<double*, 6>{&r.n_selected, &r.accuracy, &r.balanced_accuracy, &r.f1, &r.macro_f1, &r.roc_auc};
    };
    const auto mean = fields(study.mean);
    const auto sd = fields(study.std);
    for (const auto& run : study.runs) {
        auto s = summary_of(run);
        const auto v = fields(s);
        for (std::size_t k = 0; k < 6; ++k) *mean[k] += *v[k];
    }
    for (std::size_t k = 0; k < 6; ++k) *mean[k] /= static_cast<double>(n);
    if (n < 2) return;
    for (const auto& run : study.runs) {
        auto s = summary_of(run);
        const auto v = fields(s);
        for (std::size_t k = 0; k < 6; ++k) *sd[k] += (*v[k] - *mean[k]) * (*v[k] - *mean[k]);
    }
    for (std::size_t k = 0; k < 6; ++k) *sd[k] = std::sqrt(*sd[k] / static_cast<double>(n - 1));
}

GaStudy run_ga_study(const ExperimentConfig& cfg, const Dataset& ds,
                     const std::function<void(const GaStudy&)>& on_run) {
    cfg.validate(true);
    GaStudy study;
    study.feature_set = cfg.ga_feature_set;
    const auto splits = annotated(ModelKind::extra_trees, cfg.ga_feature_set, [&] {
        return prepare_splits(select_feature_set(ds, cfg.ga_feature_set), cfg.fractions, cfg.split_seed);
    });
    study.n_features = splits.train.n_features();
    study.full_feature = annotated(ModelKind::extra_trees, cfg.ga_feature_set, [&] {
        return evaluate_model(ModelKind::extra_trees, cfg.ga_feature_set, splits, cfg);
    });

    for (auto seed : cfg.ga_seeds) {
        GaConfig ga = cfg.ga;
        ga.seed = seed;
        ga.evaluator.n_threads = cfg.threads;
        ga.final_classifier.n_threads = cfg.threads;
        const auto start = Clock::now();
        GaRun run;
        run.seed = seed;
        try {
            run.result = run_ga({splits.train, splits.validation, splits.test}, ga);
        } catch (const Error& e) {
            throw Error(e.kind(), "GA seed " + std::to_string(seed) + ": " + e.what());
        }
        run.seconds = seconds_since(start);
        study.runs.push_back(std::move(run));
        aggregate(study);
        if (on_run) on_run(study);
    }
    return study;
}

}  // namespace gridga::harness
