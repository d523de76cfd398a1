#include "gridga/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include "gridga/csv.hpp"
#include "gridga/error.hpp"
#include "gridga/random.hpp"

namespace gridga {

namespace {

std::string_view trim(std::string_view s) {
    constexpr std::string_view blanks = " \t\r\n";
    const auto first = s.find_first_not_of(blanks);
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(blanks) - first + 1);
}

}  // namespace

const char* to_string(FeatureGroup g) noexcept {
    switch (g) {
        case FeatureGroup::pmu_measurement: return "pmu_measurement";
        case FeatureGroup::relay_status: return "relay_status";
        case FeatureGroup::log: return "log";
    }
    return "?";
}

std::optional<FeatureGroup> parse_feature_group(std::string_view s) {
    if (s == "pmu_measurement") return FeatureGroup::pmu_measurement;
    if (s == "relay_status") return FeatureGroup::relay_status;
    if (s == "log") return FeatureGroup::log;
    return std::nullopt;
}

const char* to_string(FeatureSet s) noexcept {
    switch (s) {
        case FeatureSet::all: return "all";
        case FeatureSet::pmu_only: return "pmu_only";
        case FeatureSet::pmu_without_status: return "pmu_without_status";
    }
    return "?";
}

FeatureSet parse_feature_set(std::string_view s) {
    if (s == "all") return FeatureSet::all;
    if (s == "pmu_only") return FeatureSet::pmu_only;
    if (s == "pmu_without_status") return FeatureSet::pmu_without_status;
    throw Error(ErrorKind::usage, "unknown feature set '" + std::string(s) +
                                      "' (expected all, pmu_only or pmu_without_status)");
}

bool feature_set_keeps(FeatureSet set, FeatureGroup group) noexcept {
    switch (set) {
        case FeatureSet::all: return true;
        case FeatureSet::pmu_only: return group != FeatureGroup::log;
        case FeatureSet::pmu_without_status: return group == FeatureGroup::pmu_measurement;
    }
    return false;
}

// ---------------------------------------------------------------------------

Dataset::Dataset(std::vector<std::string> feature_names, Matrix values,
                 std::vector<std::uint8_t> labels, std::vector<FeatureGroup> groups)
    : names_(std::move(feature_names)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      groups_(std::move(groups)) {
    if (values_.rows() != labels_.size())
        throw Error(ErrorKind::usage, "row count does not match label count");
    if (values_.cols() != names_.size() || names_.size() != groups_.size())
        throw Error(ErrorKind::usage, "column count does not match names/groups");
    for (auto y : labels_)
        if (y > 1) throw Error(ErrorKind::usage, "labels must be 0 or 1");
}

Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
    std::vector<std::uint8_t> labels;
    labels.reserve(rows.size());
    for (auto r : rows) {
        if (r >= labels_.size()) throw Error(ErrorKind::usage, "row index out of range");
        labels.push_back(labels_[r]);
    }
    return Dataset(names_, values_.take_rows(rows), std::move(labels), groups_);
}

Dataset Dataset::take_cols(std::span<const std::size_t> cols) const {
    std::vector<std::string> names;
    std::vector<FeatureGroup> groups;
    for (auto c : cols) {
        if (c >= names_.size()) throw Error(ErrorKind::usage, "column index out of range");
        names.push_back(names_[c]);
        groups.push_back(groups_[c]);
    }
    return Dataset(std::move(names), values_.take_cols(cols), labels_, std::move(groups));
}

Dataset Dataset::with_values(Matrix values) const {
    return Dataset(names_, std::move(values), labels_, groups_);
}

bool operator==(const Dataset& a, const Dataset& b) {
    return a.names_ == b.names_ && a.values_ == b.values_ && a.labels_ == b.labels_ &&
           a.groups_ == b.groups_;
}

// ---------------------------------------------------------------------------

void FeatureManifest::set(std::string column, FeatureGroup group) {
    groups_[std::move(column)] = group;
}

std::optional<FeatureGroup> FeatureManifest::find(const std::string& column) const {
    const auto it = groups_.find(column);
    if (it == groups_.end()) return std::nullopt;
    return it->second;
}

std::size_t FeatureManifest::count(FeatureGroup g) const {
    return static_cast<std::size_t>(
        std::count_if(groups_.begin(), groups_.end(), [g](const auto& kv) { return kv.second == g; }));
}

std::vector<std::string> FeatureManifest::msu_ornl_columns() {
    std::vector<std::string> cols;
    for (int relay = 1; relay <= 4; ++relay) {
        const std::string r = "R" + std::to_string(relay);
        // PA/PM 1-3 phase voltages, 4-6 phase currents, 7-9 sequence
        // voltages, 10-12 sequence currents.
        for (int k = 1; k <= 12; ++k) {
            const bool voltage = (k - 1) / 3 % 2 == 0;
            const std::string idx = std::to_string(k);
            cols.push_back(r + "-PA" + idx + (voltage ? ":VH" : ":IH"));
            cols.push_back(r + "-PM" + idx + (voltage ? ":V" : ":I"));
        }
        cols.push_back(r + ":F");
        cols.push_back(r + ":DF");
        cols.push_back(r + "-PA:Z");
        cols.push_back(r + "-PA:ZH");
        cols.push_back(r + ":S");
    }
    for (int k = 1; k <= 4; ++k) cols.push_back("control_panel_log" + std::to_string(k));
    for (int k = 1; k <= 4; ++k) cols.push_back("relay" + std::to_string(k) + "_log");
    for (int k = 1; k <= 4; ++k) cols.push_back("snort_log" + std::to_string(k));
    return cols;
}

FeatureManifest FeatureManifest::msu_ornl_default() {
    FeatureManifest m;
    for (const auto& col : msu_ornl_columns()) {
        FeatureGroup g = FeatureGroup::pmu_measurement;
        if (col.find("_log") != std::string::npos)
            g = FeatureGroup::log;
        else if (col.size() == 4 && col.ends_with(":S"))
            g = FeatureGroup::relay_status;
        m.set(col, g);
    }
    return m;
}

FeatureManifest FeatureManifest::parse(std::string_view text) {
    FeatureManifest m;
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
        // Column names may contain '=' only in theory; split on the last one.
        const auto eq = line.rfind('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::config, "manifest line " + std::to_string(line_no) +
                                               ": expected 'column = group'");
        const auto name = trim(line.substr(0, eq));
        const auto group_text = trim(line.substr(eq + 1));
        const auto group = parse_feature_group(group_text);
        if (name.empty() || !group)
            throw Error(ErrorKind::config, "manifest line " + std::to_string(line_no) +
                                               ": bad entry '" + std::string(line) + "'");
        m.set(std::string(name), *group);
    }
    return m;
}

FeatureManifest FeatureManifest::load(const std::filesystem::path& path) {
    return parse(csv::read_file(path));
}

std::string FeatureManifest::to_text() const {
    std::string out;
    for (const auto& [name, group] : groups_) out += name + " = " + to_string(group) + "\n";
    return out;
}

LabelMap LabelMap::parse(std::string_view text) {
    LabelMap map;
    map.codes.clear();
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = std::min(text.find(',', pos), text.size());
        const auto item = trim(text.substr(pos, comma - pos));
        pos = comma + 1;
        if (item.empty()) continue;
        const auto colon = item.rfind(':');
        const auto code = colon == std::string_view::npos ? std::string_view{} : trim(item.substr(colon + 1));
        if (code != "0" && code != "1")
            throw Error(ErrorKind::config, "label map entry '" + std::string(item) + "' must be name:0 or name:1");
        map.codes[std::string(trim(item.substr(0, colon)))] = code == "1" ? kAttack : kNatural;
    }
    if (map.codes.empty()) throw Error(ErrorKind::config, "empty label map");
    return map;
}

// ---------------------------------------------------------------------------

namespace {

struct ParsedFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

ParsedFile parse_file(const std::filesystem::path& path) {
    auto records = csv::parse(csv::read_file(path));
    if (records.empty()) throw Error(ErrorKind::schema, path.string() + ": missing header row");
    ParsedFile f;
    f.header = std::move(records.front());
    for (auto& h : f.header) h = std::string(trim(h));
    // UTF-8 byte-order mark on the first header cell.
    if (!f.header.empty() && f.header[0].starts_with("\xEF\xBB\xBF")) f.header[0].erase(0, 3);
    f.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        if (f.rows[i].size() != f.header.size())
            throw Error(ErrorKind::schema, path.string() + ": row " + std::to_string(i + 2) + " has " +
                                               std::to_string(f.rows[i].size()) + " fields, header has " +
                                               std::to_string(f.header.size()));
    }
    return f;
}

}  // namespace

Dataset load_csv(std::span<const std::filesystem::path> paths, const FeatureManifest& manifest,
                 const CsvLoadOptions& options) {
    if (paths.empty()) throw Error(ErrorKind::usage, "no CSV files given");

    std::vector<ParsedFile> files(paths.size());
    if (options.parallel && paths.size() > 1) {
        std::vector<std::future<ParsedFile>> jobs;
        for (const auto& p : paths) jobs.push_back(std::async(std::launch::async, parse_file, p));
        for (std::size_t i = 0; i < jobs.size(); ++i) files[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < paths.size(); ++i) files[i] = parse_file(paths[i]);
    }

    const auto& header = files.front().header;
    for (std::size_t i = 1; i < files.size(); ++i) {
        if (files[i].header != header)
            throw Error(ErrorKind::schema, paths[i].string() + ": header differs from " + paths[0].string());
    }

    std::optional<std::size_t> label_col;
    std::vector<std::size_t> feature_cols;
    std::vector<std::string> names;
    std::vector<FeatureGroup> groups;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == options.label_column) {
            label_col = c;
            continue;
        }
        const auto group = manifest.find(header[c]);
        if (!group) throw Error(ErrorKind::manifest, "column '" + header[c] + "' is not in the manifest");
        feature_cols.push_back(c);
        names.push_back(header[c]);
        groups.push_back(*group);
    }
    if (!label_col)
        throw Error(ErrorKind::schema, "label column '" + options.label_column + "' not found");

    std::size_t n = 0;
    for (const auto& f : files) n += f.rows.size();

    Matrix values(n, feature_cols.size());
    std::vector<std::uint8_t> labels;
    labels.reserve(n);
    std::size_t r = 0;
    for (std::size_t fi = 0; fi < files.size(); ++fi) {
        for (const auto& row : files[fi].rows) {
            const std::string key(trim(row[*label_col]));
            const auto it = options.label_map.codes.find(key);
            if (it == options.label_map.codes.end())
                throw Error(ErrorKind::label, paths[fi].string() + ": unmapped label '" + key + "'");
            labels.push_back(it->second);
            for (std::size_t j = 0; j < feature_cols.size(); ++j)
                values(r, j) = csv::parse_real(row[feature_cols[j]]);
            ++r;
        }
    }
    return Dataset(std::move(names), std::move(values), std::move(labels), std::move(groups));
}

std::vector<std::filesystem::path> list_csv_files(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw Error(ErrorKind::io, "not a directory: " + dir.string());
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (ext == ".csv") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> feature_set_columns(const Dataset& ds, FeatureSet set) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < ds.n_features(); ++c)
        if (feature_set_keeps(set, ds.groups()[c])) cols.push_back(c);
    return cols;
}

Dataset select_feature_set(const Dataset& ds, FeatureSet set) {
    const auto cols = feature_set_columns(ds, set);
    return ds.take_cols(cols);
}

// ---------------------------------------------------------------------------

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_samples < 2) throw Error(ErrorKind::usage, "synthetic data needs at least 2 samples");
    if (!(spec.class_balance > 0.0 && spec.class_balance < 1.0))
        throw Error(ErrorKind::usage, "class_balance must be in (0, 1)");
    if (spec.n_features() == 0) throw Error(ErrorKind::usage, "synthetic data needs at least one feature");
    if (spec.n_redundant > 0 && spec.n_informative == 0)
        throw Error(ErrorKind::usage, "redundant features need informative ones");

    Rng rng(derive_seed(spec.seed, 0));
    const std::size_t n = spec.n_samples;
    auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.class_balance));
    n_pos = std::clamp<std::size_t>(n_pos, 1, n - 1);

    std::vector<std::uint8_t> labels(n, kNatural);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), kAttack);
    shuffle(labels, rng);

    const std::size_t d = spec.n_features();
    Matrix values(n, d);
    std::vector<std::string> names;
    const double half_gap = spec.separation / 2.0;
    for (std::size_t j = 0; j < spec.n_informative; ++j) {
        names.push_back("inf_" + std::to_string(j));
        auto col = values.column(j);
        for (std::size_t i = 0; i < n; ++i)
            col[i] = standard_normal(rng) + (labels[i] == kAttack ? half_gap : -half_gap);
    }
    for (std::size_t j = 0; j < spec.n_redundant; ++j) {
        names.push_back("red_" + std::to_string(j));
        std::vector<double> weights(spec.n_informative);
        for (auto& w : weights) w = 2.0 * uniform01(rng) - 1.0;
        auto col = values.column(spec.n_informative + j);
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            for (std::size_t k = 0; k < spec.n_informative; ++k) v += weights[k] * values(i, k);
            col[i] = v;
        }
    }
    for (std::size_t j = 0; j < spec.n_noise; ++j) {
        names.push_back("noise_" + std::to_string(j));
        auto col = values.column(spec.n_informative + spec.n_redundant + j);
        for (auto& v : col) v = standard_normal(rng);
    }
    return Dataset(std::move(names), std::move(values), std::move(labels),
                   std::vector<FeatureGroup>(d, FeatureGroup::pmu_measurement));
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    for (const auto& name : ds.feature_names()) out << csv::escape(name) << ',';
    out << "marker\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        for (std::size_t j = 0; j < ds.n_features(); ++j) {
            const double v = ds.values()(i, j);
            if (std::isnan(v)) {
                out << ',';
                continue;
            }
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            out.write(buf, res.ptr - buf);
            out << ',';
        }
        out << (ds.labels()[i] == kAttack ? "Attack" : "Natural") << '\n';
    }
}

}  // namespace gridga
