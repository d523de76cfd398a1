#include "gridga/harness/report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "gridga/csv.hpp"
#include "gridga/error.hpp"

namespace gridga::harness {

namespace {

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << text;
}

ModelKind model_from(const std::string& s) { return parse_model(s); }

MetricsReport metrics_from(const Json& j) {
    MetricsReport m;
    m.accuracy = j.at("accuracy").get<double>();
    m.balanced_accuracy = j.at("balanced_accuracy").get<double>();
    m.precision_pos = j.at("precision").get<double>();
    m.recall_pos = j.at("recall").get<double>();
    m.f1_pos = j.at("f1").get<double>();
    m.recall_neg = j.at("recall_neg").get<double>();
    m.f1_neg = j.at("f1_neg").get<double>();
    m.macro_f1 = j.at("macro_f1").get<double>();
    m.roc_auc = j.at("roc_auc").get<double>();
    m.threshold = j.at("threshold").get<double>();
    return m;
}

const char* csv_header =
    "model,feature_set,n_features,seed,accuracy,balanced_accuracy,precision,recall,f1,f1_neg,macro_f1,roc_auc,"
    "threshold,tp,fp,tn,fn\n";

const std::array<const char*, 6> ga_columns{"n_selected", "accuracy", "balanced_accuracy", "f1", "macro_f1", "roc_auc"};

std::string ga_runs_csv(const Json& ga) {
    std::string out = "seed,n_selected,accuracy,balanced_accuracy,f1,macro_f1,roc_auc,best_j,validation_macro_f1\n";
    for (const auto& run : ga.at("runs")) {
        const auto& m = run.at("test_metrics");
        out += std::to_string(run.at("seed").get<std::uint64_t>()) + "," +
               std::to_string(run.at("n_selected").get<std::size_t>()) + "," + num(m.at("accuracy")) + "," +
               num(m.at("balanced_accuracy")) + "," + num(m.at("f1")) + "," + num(m.at("macro_f1")) + "," +
               num(m.at("roc_auc")) + "," + num(run.at("best_j")) + "," + num(run.at("validation_macro_f1")) + "\n";
    }
    for (const char* stat : {"mean", "std"}) {
        const auto& row = ga.at(stat);
        out += stat;
        for (const char* c : ga_columns) out += "," + num(row.at(c));
        out += ",,\n";
    }
    return out;
}

std::string ga_markdown(const Json& ga) {
    std::ostringstream md;
    md << "# GA + Extra Trees results (" << ga.at("feature_set").get<std::string>() << ", d = "
       << ga.at("n_features").get<std::size_t>() << ")\n\n";
    md << "| Seed | #Selected | Acc. | Bal. Acc. | F1 | Macro-F1 | ROC-AUC |\n";
    md << "|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& run : ga.at("runs")) {
        const auto& m = run.at("test_metrics");
        md << "| " << run.at("seed").get<std::uint64_t>() << " | " << run.at("n_selected").get<std::size_t>() << " | "
           << fixed4(m.at("accuracy")) << " | " << fixed4(m.at("balanced_accuracy")) << " | " << fixed4(m.at("f1"))
           << " | " << fixed4(m.at("macro_f1")) << " | " << fixed4(m.at("roc_auc")) << " |\n";
    }
    for (const char* stat : {"mean", "std"}) {
        const auto& row = ga.at(stat);
        char count[32];
        std::snprintf(count, sizeof count, stat[0] == 'm' ? "%.1f" : "%.2f", row.at("n_selected").get<double>());
        md << "| " << (stat[0] == 'm' ? "Mean" : "Std.") << " | " << count << " | " << fixed4(row.at("accuracy"))
           << " | " << fixed4(row.at("balanced_accuracy")) << " | " << fixed4(row.at("f1")) << " | "
           << fixed4(row.at("macro_f1")) << " | " << fixed4(row.at("roc_auc")) << " |\n";
    }

    const auto full = row_from_json(ga.at("full_feature"));
    const auto& mean = ga.at("mean");
    md << "\n# Full-feature vs GA-selected Extra Trees\n\n";
    md << "| Method | #Features | Acc. | Bal. Acc. | Macro-F1 | ROC-AUC |\n";
    md << "|---|---:|---:|---:|---:|---:|\n";
    md << "| Extra Trees, " << to_string(full.feature_set) << " | " << full.n_features << " | "
       << fixed4(full.metrics.accuracy) << " | " << fixed4(full.metrics.balanced_accuracy) << " | "
       << fixed4(full.metrics.macro_f1) << " | " << fixed4(full.metrics.roc_auc) << " |\n";
    char count[32];
    std::snprintf(count, sizeof count, "%.1f", mean.at("n_selected").get<double>());
    md << "| GA + Extra Trees, mean over " << ga.at("runs").size() << " runs | " << count << " | "
       << fixed4(mean.at("accuracy")) << " | " << fixed4(mean.at("balanced_accuracy")) << " | "
       << fixed4(mean.at("macro_f1")) << " | " << fixed4(mean.at("roc_auc")) << " |\n";
    if (ga.contains("evaluator_trees") && ga.contains("final_trees"))
        md << "\nGA search used a " << ga.at("evaluator_trees").get<std::size_t>()
           << "-tree evaluator per candidate; the final classifier on the selected mask used "
           << ga.at("final_trees").get<std::size_t>() << " trees.\n";
    return md.str();
}

std::string ga_comparison_csv(const Json& ga) {
    const auto full = row_from_json(ga.at("full_feature"));
    const auto& mean = ga.at("mean");
    std::string out = "method,n_features,accuracy,balanced_accuracy,macro_f1,roc_auc\n";
    out += "full_feature," + std::to_string(full.n_features) + "," + num(full.metrics.accuracy) + "," +
           num(full.metrics.balanced_accuracy) + "," + num(full.metrics.macro_f1) + "," + num(full.metrics.roc_auc) +
           "\n";
    out += "ga_mean," + num(mean.at("n_selected")) + "," + num(mean.at("accuracy")) + "," +
           num(mean.at("balanced_accuracy")) + "," + num(mean.at("macro_f1")) + "," + num(mean.at("roc_auc")) + "\n";
    return out;
}

Json summary_json(const GaSummaryRow& r) {
    return Json{{"n_selected", r.n_selected}, {"accuracy", r.accuracy}, {"balanced_accuracy", r.balanced_accuracy},
                {"f1", r.f1},           {"macro_f1", r.macro_f1}, {"roc_auc", r.roc_auc}};
}

}  // namespace

Json to_json(const MetricsReport& m) {
    return Json{{"accuracy", m.accuracy}, {"balanced_accuracy", m.balanced_accuracy},
                {"precision", m.precision_pos}, {"recall", m.recall_pos},
                {"f1", m.f1_pos},         {"recall_neg", m.recall_neg},
                {"f1_neg", m.f1_neg},     {"macro_f1", m.macro_f1},
                {"roc_auc", m.roc_auc},   {"threshold", m.threshold}};
}

Json to_json(const ConfusionCounts& c) {
    return Json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

Json to_json(const ResultRow& row) {
    return Json{{"model", to_string(row.model)},
                {"feature_set", to_string(row.feature_set)},
                {"n_features", row.n_features},
                {"seed", row.seed},
                {"metrics", to_json(row.metrics)},
                {"confusion", to_json(row.confusion)},
                {"seconds", row.seconds}};
}

ResultRow row_from_json(const Json& j) {
    ResultRow row;
    row.model = model_from(j.at("model").get<std::string>());
    row.feature_set = parse_feature_set(j.at("feature_set").get<std::string>());
    row.n_features = j.at("n_features").get<std::size_t>();
    row.seed = j.at("seed").get<std::uint64_t>();
    row.metrics = metrics_from(j.at("metrics"));
    const auto& c = j.at("confusion");
    row.confusion = {c.at("tp").get<std::uint64_t>(), c.at("fp").get<std::uint64_t>(),
                     c.at("tn").get<std::uint64_t>(), c.at("fn").get<std::uint64_t>()};
    row.seconds = j.value("seconds", 0.0);
    return row;
}

Json to_json(const GaStudy& study) {
    Json runs = Json::array();
    for (const auto& run : study.runs) {
        const auto& r = run.result;
        Json history = Json::array();
        for (const auto& h : r.history)
            history.push_back({{"generation", h.generation},
                               {"best_j", h.best_j},
                               {"mean_j", h.mean_j},
                               {"best_popcount", h.best_popcount},
                               {"best_ever_j", h.best_ever_j}});
        runs.push_back({{"seed", run.seed},
                        {"n_selected", r.best_mask.popcount()},
                        {"mask", r.best_mask.to_string()},
                        {"selected_features", r.selected_features},
                        {"best_j", r.best_j},
                        {"validation_macro_f1", r.best_validation_macro_f1},
                        {"test_metrics", to_json(r.test_report)},
                        {"test_confusion", to_json(r.test_confusion)},
                        {"evaluations", r.evaluations},
                        {"cache_hits", r.cache_hits},
                        {"seconds", run.seconds},
                        {"history", history}});
    }
    return Json{{"feature_set", to_string(study.feature_set)},
                {"n_features", study.n_features},
                {"runs", runs},
                {"mean", summary_json(study.mean)},
                {"std", summary_json(study.std)},
                {"full_feature", to_json(study.full_feature)}};
}

Json environment_stamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return Json{{"tool", "gridga"},
                {"version", "1.0.0"},
                {"compiler", __VERSION__},
                {"cplusplus", __cplusplus},
                {"hardware_threads", std::thread::hardware_concurrency()},
                {"timestamp_utc", stamp}};
}

Json load_results(const std::filesystem::path& dir) {
    const auto path = dir / "results.json";
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "no results.json in " + dir.string());
    try {
        return Json::parse(csv::read_file(path));
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::schema, path.string() + ": " + e.what());
    }
}

void store_run(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig& cfg,
               Json payload) {
    std::filesystem::create_directories(dir);
    Json doc = {{"format", "gridga-results"}, {"version", 1}, {"runs", Json::object()}};
    if (std::filesystem::exists(dir / "results.json")) {
        try {
            doc = load_results(dir);
        } catch (const Error&) {
            // Unreadable previous document: start over.
        }
    }
    Json config = Json::object();
    const auto flat = to_flat(cfg);
    for (const auto& [k, v] : flat.values()) config[k] = v;
    payload["config"] = config;
    payload["environment"] = environment_stamp();
    doc["runs"][command] = std::move(payload);
    write_text(dir / "results.json", doc.dump(2) + "\n");
}

std::string rows_csv(const std::vector<ResultRow>& rows) {
    std::string out = csv_header;
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        out += std::string(to_string(r.model)) + "," + to_string(r.feature_set) + "," + std::to_string(r.n_features) +
               "," + std::to_string(r.seed) + "," + num(m.accuracy) + "," + num(m.balanced_accuracy) + "," +
               num(m.precision_pos) + "," + num(m.recall_pos) + "," + num(m.f1_pos) + "," + num(m.f1_neg) + "," +
               num(m.macro_f1) + "," + num(m.roc_auc) + "," + num(m.threshold) + "," + std::to_string(r.confusion.tp) +
               "," + std::to_string(r.confusion.fp) + "," + std::to_string(r.confusion.tn) + "," +
               std::to_string(r.confusion.fn) + "\n";
    }
    return out;
}

std::string rows_markdown(const std::vector<ResultRow>& rows, const std::string& title) {
    std::ostringstream md;
    md << "# " << title << "\n\n";
    md << "| Model | Features | #Feat. | Acc. | Bal. Acc. | Prec. | Rec. | F1 | Macro-F1 | ROC-AUC |\n";
    md << "|---|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        md << "| " << display_name(r.model) << " | " << to_string(r.feature_set) << " | " << r.n_features << " | "
           << fixed4(m.accuracy) << " | " << fixed4(m.balanced_accuracy) << " | " << fixed4(m.precision_pos) << " | "
           << fixed4(m.recall_pos) << " | " << fixed4(m.f1_pos) << " | " << fixed4(m.macro_f1) << " | "
           << fixed4(m.roc_auc) << " |\n";
    }
    return md.str();
}

std::vector<std::filesystem::path> render_tables(const Json& results, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        written.push_back(dir / name);
    };
    try {
        const auto& runs = results.at("runs");
        for (const char* table : {"baselines", "ablation"}) {
            if (!runs.contains(table)) continue;
            std::vector<ResultRow> rows;
            for (const auto& j : runs.at(table).at("rows")) rows.push_back(row_from_json(j));
            emit(std::string(table) + ".csv", rows_csv(rows));
            emit(std::string(table) + ".md",
                 rows_markdown(rows, table[0] == 'b' ? "Baseline classification results" : "Feature-set ablation"));
        }
        if (runs.contains("ga")) {
            const auto& ga = runs.at("ga");
            emit("ga_runs.csv", ga_runs_csv(ga));
            emit("ga_comparison.csv", ga_comparison_csv(ga));
            emit("ga_runs.md", ga_markdown(ga));
            for (const auto& run : ga.at("runs")) {
                const auto seed = std::to_string(run.at("seed").get<std::uint64_t>());
                std::string hist = "generation,best_J,mean_J,best_popcount\n";
                for (const auto& h : run.at("history"))
                    hist += std::to_string(h.at("generation").get<std::size_t>()) + "," + num(h.at("best_j")) + "," +
                            num(h.at("mean_j")) + "," + std::to_string(h.at("best_popcount").get<std::size_t>()) +
                            "\n";
                emit("ga_history_" + seed + ".csv", hist);
                std::string names;
                for (const auto& n : run.at("selected_features")) names += n.get<std::string>() + "\n";
                emit("selected_features_" + seed + ".txt", names);
            }
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::schema, std::string("results.json: ") + e.what());
    }
    return written;
}

}  // namespace gridga::harness
