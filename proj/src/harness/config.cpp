#include "gridga/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "gridga/csv.hpp"
#include "gridga/error.hpp"

namespace gridga::harness {

namespace {

std::string_view trim(std::string_view s) {
    constexpr std::string_view blanks = " \t\r\n";
    const auto first = s.find_first_not_of(blanks);
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(blanks) - first + 1);
}

std::string unquote(std::string_view v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        return std::string(v.substr(1, v.size() - 2));
    return std::string(v);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw Error(ErrorKind::config, "config key '" + key + "': '" + value + "' is not " + expected);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) bad_value(key, value, "a non-negative integer");
    return v;
}

double to_double(const std::string& key, const std::string& value) {
    double v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size() || !std::isfinite(v))
        bad_value(key, value, "a real number");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "a boolean");
}

std::string format(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += fmt(items[i]);
    }
    return out;
}

// Consumes keys from a copy of the flat map so leftovers can be reported.
class Reader {
public:
    explicit Reader(const FlatConfig& flat) : values_(flat.values()) {}

    template <typename F>
    void with(const std::string& key, F&& apply) {
        const auto it = values_.find(key);
        if (it == values_.end()) return;
        const std::string value = it->second;
        values_.erase(it);
        apply(key, value);
    }

    void finish() const {
        if (values_.empty()) return;
        std::string keys;
        for (const auto& [k, v] : values_) keys += (keys.empty() ? "" : ", ") + k;
        throw Error(ErrorKind::config, "unknown config keys: " + keys);
    }

private:
    std::map<std::string, std::string> values_;
};

void read_forest(Reader& r, const std::string& section, ForestConfig& f) {
    r.with(section + ".n_trees", [&](auto& k, auto& v) { f.n_trees = to_u64(k, v); });
    r.with(section + ".max_features", [&](auto& k, auto& v) { f.max_features = to_u64(k, v); });
    r.with(section + ".min_samples_split", [&](auto& k, auto& v) { f.min_samples_split = to_u64(k, v); });
    r.with(section + ".min_samples_leaf", [&](auto& k, auto& v) { f.min_samples_leaf = to_u64(k, v); });
    r.with(section + ".max_depth", [&](auto& k, auto& v) {
        if (v == "none") f.max_depth.reset();
        else f.max_depth = to_u64(k, v);
    });
    r.with(section + ".bootstrap", [&](auto& k, auto& v) {
        if (v == "auto") f.bootstrap.reset();
        else f.bootstrap = to_bool(k, v);
    });
    r.with(section + ".seed", [&](auto& k, auto& v) { f.seed = to_u64(k, v); });
}

void write_forest(FlatConfig& out, const std::string& section, const ForestConfig& f) {
    out.set(section + ".n_trees", std::to_string(f.n_trees));
    out.set(section + ".max_features", std::to_string(f.max_features));
    out.set(section + ".min_samples_split", std::to_string(f.min_samples_split));
    out.set(section + ".min_samples_leaf", std::to_string(f.min_samples_leaf));
    out.set(section + ".max_depth", f.max_depth ? std::to_string(*f.max_depth) : "none");
    out.set(section + ".bootstrap", f.bootstrap ? (*f.bootstrap ? "true" : "false") : "auto");
    out.set(section + ".seed", std::to_string(f.seed));
}

}  // namespace

const char* to_string(ModelKind m) noexcept {
    switch (m) {
        case ModelKind::logistic: return "logistic";
        case ModelKind::random_forest: return "random_forest";
        case ModelKind::extra_trees: return "extra_trees";
    }
    return "?";
}

const char* display_name(ModelKind m) noexcept {
    switch (m) {
        case ModelKind::logistic: return "Logistic Regression";
        case ModelKind::random_forest: return "Random Forest";
        case ModelKind::extra_trees: return "Extra Trees";
    }
    return "?";
}

ModelKind parse_model(std::string_view s) {
    if (s == "logistic") return ModelKind::logistic;
    if (s == "random_forest") return ModelKind::random_forest;
    if (s == "extra_trees") return ModelKind::extra_trees;
    throw Error(ErrorKind::config,
                "unknown model '" + std::string(s) + "' (expected logistic, random_forest or extra_trees)");
}

std::vector<std::string> split_list(std::string_view text) {
    text = trim(text);
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = std::min(text.find(',', pos), text.size());
        const auto item = trim(text.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(unquote(item));
        pos = comma + 1;
    }
    return out;
}

void ExperimentConfig::validate(bool ga_enabled) const {
    if (models.empty()) throw Error(ErrorKind::config, "model roster is empty");
    if (feature_sets.empty()) throw Error(ErrorKind::config, "no feature sets configured");
    if (ga_enabled && ga_seeds.empty()) throw Error(ErrorKind::config, "GA enabled but no seeds given");
    if (data.kind == DataSource::Kind::csv && data.dir.empty() && data.files.empty())
        throw Error(ErrorKind::config, "no data: set data.dir, data.files or data.source = synthetic");
    const double sum = fractions.train + fractions.validation + fractions.test;
    if (!(fractions.train > 0 && fractions.validation > 0 && fractions.test > 0) || std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorKind::config, "split.fractions must be three positive values summing to 1");
}

FlatConfig FlatConfig::parse(std::string_view text) {
    FlatConfig cfg;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = std::min(text.find('\n', pos), text.size());
        auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(ErrorKind::config, "config line " + std::to_string(line_no) + ": bad section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::config, "config line " + std::to_string(line_no) + ": expected key = value");
        const auto key = std::string(trim(line.substr(0, eq)));
        if (key.empty()) throw Error(ErrorKind::config, "config line " + std::to_string(line_no) + ": empty key");
        cfg.set(section.empty() ? key : section + "." + key, unquote(trim(line.substr(eq + 1))));
    }
    return cfg;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
    try {
        return parse(csv::read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::io) throw Error(ErrorKind::config, e.what());
        throw;
    }
}

ExperimentConfig build_config(const FlatConfig& flat) {
    ExperimentConfig cfg;
    Reader r(flat);

    r.with("data.source", [&](auto& k, auto& v) {
        if (v == "csv") cfg.data.kind = DataSource::Kind::csv;
        else if (v == "synthetic") cfg.data.kind = DataSource::Kind::synthetic;
        else bad_value(k, v, "csv or synthetic");
    });
    r.with("data.dir", [&](auto&, auto& v) { cfg.data.dir = v; });
    r.with("data.files", [&](auto&, auto& v) {
        cfg.data.files.clear();
        for (auto& f : split_list(v)) cfg.data.files.emplace_back(f);
    });
    r.with("data.manifest", [&](auto&, auto& v) {
        if (v.empty() || v == "default") cfg.data.manifest.reset();
        else cfg.data.manifest = v;
    });
    r.with("data.label_column", [&](auto&, auto& v) { cfg.data.label_column = v; });
    r.with("data.label_map", [&](auto&, auto& v) { cfg.data.label_map = LabelMap::parse(v); });

    auto& syn = cfg.data.synthetic;
    r.with("synthetic.n_samples", [&](auto& k, auto& v) { syn.n_samples = to_u64(k, v); });
    r.with("synthetic.n_informative", [&](auto& k, auto& v) { syn.n_informative = to_u64(k, v); });
    r.with("synthetic.n_redundant", [&](auto& k, auto& v) { syn.n_redundant = to_u64(k, v); });
    r.with("synthetic.n_noise", [&](auto& k, auto& v) { syn.n_noise = to_u64(k, v); });
    r.with("synthetic.class_balance", [&](auto& k, auto& v) { syn.class_balance = to_double(k, v); });
    r.with("synthetic.separation", [&](auto& k, auto& v) { syn.separation = to_double(k, v); });
    r.with("synthetic.seed", [&](auto& k, auto& v) { syn.seed = to_u64(k, v); });

    r.with("split.fractions", [&](auto& k, auto& v) {
        const auto parts = split_list(v);
        if (parts.size() != 3) bad_value(k, v, "three comma-separated fractions");
        cfg.fractions = {to_double(k, parts[0]), to_double(k, parts[1]), to_double(k, parts[2])};
    });
    r.with("split.seed", [&](auto& k, auto& v) { cfg.split_seed = to_u64(k, v); });

    r.with("experiment.feature_sets", [&](auto& k, auto& v) {
        cfg.feature_sets.clear();
        for (auto& s : split_list(v)) {
            try {
                cfg.feature_sets.push_back(parse_feature_set(s));
            } catch (const Error&) {
                bad_value(k, s, "a feature set name");
            }
        }
    });
    r.with("experiment.models", [&](auto&, auto& v) {
        cfg.models.clear();
        for (auto& m : split_list(v)) cfg.models.push_back(parse_model(m));
    });
    r.with("experiment.threads", [&](auto& k, auto& v) { cfg.threads = to_u64(k, v); });
    r.with("experiment.output", [&](auto&, auto& v) { cfg.output_dir = v; });

    read_forest(r, "extra_trees", cfg.extra_trees);
    read_forest(r, "random_forest", cfg.random_forest);
    cfg.extra_trees.mode = ForestMode::extra;
    cfg.random_forest.mode = ForestMode::random_forest;

    r.with("logistic.epochs", [&](auto& k, auto& v) { cfg.logistic.epochs = to_u64(k, v); });
    r.with("logistic.learning_rate", [&](auto& k, auto& v) { cfg.logistic.learning_rate = to_double(k, v); });
    r.with("logistic.l2", [&](auto& k, auto& v) { cfg.logistic.l2 = to_double(k, v); });
    r.with("logistic.seed", [&](auto& k, auto& v) { cfg.logistic.seed = to_u64(k, v); });

    auto& ga = cfg.ga;
    r.with("ga.population_size", [&](auto& k, auto& v) { ga.population_size = to_u64(k, v); });
    r.with("ga.generations", [&](auto& k, auto& v) { ga.generations = to_u64(k, v); });
    r.with("ga.alpha", [&](auto& k, auto& v) { ga.alpha = to_double(k, v); });
    r.with("ga.tournament_size", [&](auto& k, auto& v) { ga.tournament_size = to_u64(k, v); });
    r.with("ga.crossover_rate", [&](auto& k, auto& v) { ga.crossover_rate = to_double(k, v); });
    r.with("ga.mutation_rate", [&](auto& k, auto& v) {
        if (v == "auto") ga.mutation_rate.reset();
        else ga.mutation_rate = to_double(k, v);
    });
    r.with("ga.elitism_count", [&](auto& k, auto& v) { ga.elitism_count = to_u64(k, v); });
    r.with("ga.min_features", [&](auto& k, auto& v) { ga.min_features = to_u64(k, v); });
    r.with("ga.init_inclusion_prob", [&](auto& k, auto& v) { ga.init_inclusion_prob = to_double(k, v); });
    r.with("ga.seeds", [&](auto& k, auto& v) {
        cfg.ga_seeds.clear();
        for (auto& s : split_list(v)) cfg.ga_seeds.push_back(to_u64(k, s));
    });
    r.with("ga.feature_set", [&](auto& k, auto& v) {
        try {
            cfg.ga_feature_set = parse_feature_set(v);
        } catch (const Error&) {
            bad_value(k, v, "a feature set name");
        }
    });
    read_forest(r, "ga.evaluator", ga.evaluator);
    ga.evaluator.mode = ForestMode::extra;
    r.with("ga.evaluator.mode", [&](auto& k, auto& v) {
        if (v == "extra") ga.evaluator.mode = ForestMode::extra;
        else if (v == "random_forest") ga.evaluator.mode = ForestMode::random_forest;
        else bad_value(k, v, "extra or random_forest");
    });
    std::optional<std::size_t> final_trees;
    r.with("ga.final_trees", [&](auto& k, auto& v) { final_trees = to_u64(k, v); });

    r.finish();

    // The final GA classifier is the configured Extra Trees model, optionally
    // with a different tree count.
    ga.final_classifier = cfg.extra_trees;
    if (final_trees) ga.final_classifier.n_trees = *final_trees;
    return cfg;
}

FlatConfig to_flat(const ExperimentConfig& cfg) {
    FlatConfig out;
    out.set("data.source", cfg.data.kind == DataSource::Kind::csv ? "csv" : "synthetic");
    out.set("data.dir", cfg.data.dir.string());
    out.set("data.files", join(cfg.data.files, [](const auto& p) { return p.string(); }));
    out.set("data.manifest", cfg.data.manifest ? cfg.data.manifest->string() : "default");
    out.set("data.label_column", cfg.data.label_column);
    std::vector<std::pair<std::string, std::uint8_t>> labels(cfg.data.label_map.codes.begin(),
                                                            cfg.data.label_map.codes.end());
    out.set("data.label_map", join(labels, [](const auto& kv) { return kv.first + ":" + std::to_string(kv.second); }));

    const auto& syn = cfg.data.synthetic;
    out.set("synthetic.n_samples", std::to_string(syn.n_samples));
    out.set("synthetic.n_informative", std::to_string(syn.n_informative));
    out.set("synthetic.n_redundant", std::to_string(syn.n_redundant));
    out.set("synthetic.n_noise", std::to_string(syn.n_noise));
    out.set("synthetic.class_balance", format(syn.class_balance));
    out.set("synthetic.separation", format(syn.separation));
    out.set("synthetic.seed", std::to_string(syn.seed));

    out.set("split.fractions", format(cfg.fractions.train) + ", " + format(cfg.fractions.validation) + ", " +
                                   format(cfg.fractions.test));
    out.set("split.seed", std::to_string(cfg.split_seed));
    out.set("experiment.feature_sets", join(cfg.feature_sets, [](auto s) { return std::string(to_string(s)); }));
    out.set("experiment.models", join(cfg.models, [](auto m) { return std::string(to_string(m)); }));
    out.set("experiment.threads", std::to_string(cfg.threads));
    out.set("experiment.output", cfg.output_dir.string());

    write_forest(out, "extra_trees", cfg.extra_trees);
    write_forest(out, "random_forest", cfg.random_forest);
    out.set("logistic.epochs", std::to_string(cfg.logistic.epochs));
    out.set("logistic.learning_rate", format(cfg.logistic.learning_rate));
    out.set("logistic.l2", format(cfg.logistic.l2));
    out.set("logistic.seed", std::to_string(cfg.logistic.seed));

    const auto& ga = cfg.ga;
    out.set("ga.population_size", std::to_string(ga.population_size));
    out.set("ga.generations", std::to_string(ga.generations));
    out.set("ga.alpha", format(ga.alpha));
    out.set("ga.tournament_size", std::to_string(ga.tournament_size));
    out.set("ga.crossover_rate", format(ga.crossover_rate));
    out.set("ga.mutation_rate", ga.mutation_rate ? format(*ga.mutation_rate) : "auto");
    out.set("ga.elitism_count", std::to_string(ga.elitism_count));
    out.set("ga.min_features", std::to_string(ga.min_features));
    out.set("ga.init_inclusion_prob", format(ga.init_inclusion_prob));
    out.set("ga.seeds", join(cfg.ga_seeds, [](auto s) { return std::to_string(s); }));
    out.set("ga.feature_set", to_string(cfg.ga_feature_set));
    write_forest(out, "ga.evaluator", ga.evaluator);
    out.set("ga.evaluator.mode", to_string(ga.evaluator.mode));
    out.set("ga.final_trees", std::to_string(ga.final_classifier.n_trees));
    return out;
}

}  // namespace gridga::harness
