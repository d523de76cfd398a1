#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridga/matrix.hpp"

namespace gridga {

enum class FeatureGroup : std::uint8_t { pmu_measurement, relay_status, log };

const char* to_string(FeatureGroup g) noexcept;
std::optional<FeatureGroup> parse_feature_group(std::string_view s);

enum class FeatureSet : std::uint8_t { all, pmu_only, pmu_without_status };

const char* to_string(FeatureSet s) noexcept;
/// Throws Error(usage) on an unknown name.
FeatureSet parse_feature_set(std::string_view s);
bool feature_set_keeps(FeatureSet set, FeatureGroup group) noexcept;

/// Binary class codes. Attack is the positive class.
inline constexpr std::uint8_t kAttack = 1;
inline constexpr std::uint8_t kNatural = 0;

/// Feature matrix plus names, group tags and binary labels.
///
/// Invariants (checked by the constructor, Error(usage) otherwise):
/// values.rows() == labels.size(), values.cols() == names.size() ==
/// groups.size(), labels are 0/1.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<std::string> feature_names, Matrix values,
            std::vector<std::uint8_t> labels, std::vector<FeatureGroup> groups);

    std::size_t n_samples() const noexcept { return values_.rows(); }
    std::size_t n_features() const noexcept { return values_.cols(); }

    const std::vector<std::string>& feature_names() const noexcept { return names_; }
    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }
    const std::vector<FeatureGroup>& groups() const noexcept { return groups_; }

    Dataset take_rows(std::span<const std::size_t> rows) const;
    Dataset take_cols(std::span<const std::size_t> cols) const;
    Dataset with_values(Matrix values) const;

    friend bool operator==(const Dataset& a, const Dataset& b);

private:
    std::vector<std::string> names_;
    Matrix values_;
    std::vector<std::uint8_t> labels_;
    std::vector<FeatureGroup> groups_;
};

/// Column name -> group tag.
class FeatureManifest {
public:
    FeatureManifest() = default;

    void set(std::string column, FeatureGroup group);
    std::optional<FeatureGroup> find(const std::string& column) const;
    std::size_t size() const noexcept { return groups_.size(); }
    std::size_t count(FeatureGroup g) const;

    /// MSU/ORNL binary-set schema: relays R1..R4 with 29 measurements each
    /// (R#:S tagged relay_status) followed by 12 log columns.
    static FeatureManifest msu_ornl_default();
    /// Column names of the default schema in file order.
    static std::vector<std::string> msu_ornl_columns();

    /// Flat text: one `column = group` pair per line, `#` comments.
    /// Throws Error(config) on malformed lines.
    static FeatureManifest parse(std::string_view text);
    static FeatureManifest load(const std::filesystem::path& path);
    std::string to_text() const;

private:
    std::map<std::string, FeatureGroup> groups_;
};

struct LabelMap {
    std::map<std::string, std::uint8_t> codes{{"Attack", kAttack}, {"Natural", kNatural}};

    /// "Attack:1,Natural:0"
    static LabelMap parse(std::string_view text);
};

struct CsvLoadOptions {
    std::string label_column = "marker";
    LabelMap label_map;
    /// Parse files concurrently; the result is identical either way.
    bool parallel = true;
};

/// Loads and concatenates CSV files in the given order.
Dataset load_csv(std::span<const std::filesystem::path> paths, const FeatureManifest& manifest,
                 const CsvLoadOptions& options = {});

/// Sorted *.csv files of a directory.
std::vector<std::filesystem::path> list_csv_files(const std::filesystem::path& dir);

Dataset select_feature_set(const Dataset& ds, FeatureSet set);
/// Column indices that `set` keeps, in original order.
std::vector<std::size_t> feature_set_columns(const Dataset& ds, FeatureSet set);

struct SyntheticSpec {
    std::size_t n_samples = 1000;
    std::size_t n_informative = 5;
    std::size_t n_redundant = 5;
    std::size_t n_noise = 10;
    double class_balance = 0.7;
    double separation = 1.0;
    std::uint64_t seed = 0;

    std::size_t n_features() const noexcept { return n_informative + n_redundant + n_noise; }
};

/// Column layout: informative (inf_*), redundant (red_*), noise (noise_*).
/// Informative columns are N(+-separation/2, 1) by class, redundant columns
/// are fixed random mixtures of the informative ones, noise is N(0, 1).
/// Positives are round(n * class_balance) rows placed in shuffled order.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Writes a dataset as CSV with a `marker` column holding Attack/Natural.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace gridga
