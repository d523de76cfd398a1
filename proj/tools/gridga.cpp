#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "gridga/error.hpp"
#include "gridga/harness/report.hpp"

namespace fs = std::filesystem;
using namespace gridga;
using namespace gridga::harness;

namespace {

struct Options {
    std::string config;
    std::string data_dir;
    std::string feature_set;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string models;
    std::string ga_seeds;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "Flat config file")->check(CLI::ExistingFile);
    cmd->add_option("--data-dir", o.data_dir, "Directory of CSV files (and optional manifest.txt)");
    cmd->add_option("--feature-set", o.feature_set, "all, pmu_only or pmu_without_status");
    cmd->add_option("--seed", o.seed, "Split seed (and synthetic data seed)");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--models", o.models, "Comma-separated model roster");
    cmd->add_option("--ga-seeds", o.ga_seeds, "Comma-separated GA seeds");
}

ExperimentConfig make_config(const Options& o) {
    FlatConfig flat = o.config.empty() ? FlatConfig{} : FlatConfig::load(o.config);
    if (!o.data_dir.empty()) {
        flat.set("data.source", "csv");
        flat.set("data.dir", o.data_dir);
    }
    if (!o.feature_set.empty()) {
        flat.set("experiment.feature_sets", o.feature_set);
        flat.set("ga.feature_set", o.feature_set);
    }
    if (o.seed) {
        flat.set("split.seed", std::to_string(*o.seed));
        flat.set("synthetic.seed", std::to_string(*o.seed));
    }
    if (!o.out.empty()) flat.set("experiment.output", o.out);
    if (!o.models.empty()) flat.set("experiment.models", o.models);
    if (!o.ga_seeds.empty()) flat.set("ga.seeds", o.ga_seeds);
    return build_config(flat);
}

void render(const fs::path& dir) {
    for (const auto& p : render_tables(load_results(dir), dir)) std::cerr << "wrote " << p.string() << "\n";
}

Json rows_payload(const std::vector<ResultRow>& rows) {
    Json arr = Json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    return Json{{"rows", arr}};
}

void print_rows(const std::vector<ResultRow>& rows, const std::string& title) {
    std::cout << rows_markdown(rows, title);
}

int run_table(const Options& o, bool ablation) {
    const auto cfg = make_config(o);
    cfg.validate(false);
    const auto ds = load_dataset(cfg);
    std::cerr << "loaded " << ds.n_samples() << " samples x " << ds.n_features() << " features\n";
    const auto rows = ablation ? run_ablation(cfg, ds) : run_baselines(cfg, ds);
    const char* command = ablation ? "ablation" : "baselines";
    store_run(cfg.output_dir, command, cfg, rows_payload(rows));
    render(cfg.output_dir);
    print_rows(rows, ablation ? "Feature-set ablation" : "Baseline classification results");
    return 0;
}

int run_ga_verb(const Options& o) {
    const auto cfg = make_config(o);
    cfg.validate(true);
    const auto ds = load_dataset(cfg);
    std::cerr << "loaded " << ds.n_samples() << " samples x " << ds.n_features() << " features\n";
    auto persist = [&](const GaStudy& study, bool complete) {
        Json payload = to_json(study);
        payload["complete"] = complete;
        payload["evaluator_trees"] = cfg.ga.evaluator.n_trees;
        payload["final_trees"] = cfg.ga.final_classifier.n_trees;
        store_run(cfg.output_dir, "ga", cfg, std::move(payload));
        render(cfg.output_dir);
    };
    const auto study = run_ga_study(cfg, ds, [&](const GaStudy& partial) {
        const auto& last = partial.runs.back();
        std::cerr << "GA seed " << last.seed << ": " << last.result.best_mask.popcount() << " features, test macro-F1 "
                  << last.result.test_report.macro_f1 << " (" << last.seconds << " s)\n";
        persist(partial, partial.runs.size() == cfg.ga_seeds.size());
    });
    std::cout << "GA mean selected " << study.mean.n_selected << ", macro-F1 " << study.mean.macro_f1 << ", ROC-AUC "
              << study.mean.roc_auc << "; full-feature macro-F1 " << study.full_feature.metrics.macro_f1 << "\n";
    return 0;
}

int run_synth(const Options& o) {
    auto cfg = make_config(o);
    const fs::path out = o.out.empty() ? fs::path("synthetic") : fs::path(o.out);
    fs::create_directories(out);
    const auto ds = generate_synthetic(cfg.data.synthetic);
    write_csv(ds, out / "data.csv");
    FeatureManifest manifest;
    for (std::size_t j = 0; j < ds.n_features(); ++j) manifest.set(ds.feature_names()[j], ds.groups()[j]);
    std::ofstream(out / "manifest.txt") << manifest.to_text();
    std::cerr << "wrote " << (out / "data.csv").string() << " and manifest.txt\n";
    return 0;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage:
        case ErrorKind::config: return 2;
        case ErrorKind::metric_undefined: return 4;
        default: return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid intrusion detection experiments: baselines, ablation, GA feature selection"};
    app.require_subcommand(1);
    Options o;
    auto* baselines = app.add_subcommand("baselines", "Every (model, feature set) pair of the roster");
    auto* ablation = app.add_subcommand("ablation", "Tree models over all three feature sets");
    auto* ga = app.add_subcommand("ga", "GA feature selection study over the configured seeds");
    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset and its manifest to --out");
    auto* report = app.add_subcommand("report", "Re-render tables from <out>/results.json");
    for (auto* cmd : {baselines, ablation, ga, synth, report}) add_common(cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (baselines->parsed()) return run_table(o, false);
        if (ablation->parsed()) return run_table(o, true);
        if (ga->parsed()) return run_ga_verb(o);
        if (synth->parsed()) return run_synth(o);
        const auto cfg = make_config(o);
        render(cfg.output_dir);
        return 0;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error (io): " << e.what() << "\n";
        return 3;
    }
}
