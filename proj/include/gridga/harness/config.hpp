#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridga/dataset.hpp"
#include "gridga/forest.hpp"
#include "gridga/ga.hpp"
#include "gridga/logistic.hpp"
#include "gridga/preprocess.hpp"

namespace gridga::harness {

enum class ModelKind : std::uint8_t { logistic, random_forest, extra_trees };

const char* to_string(ModelKind m) noexcept;
/// Throws Error(config).
ModelKind parse_model(std::string_view s);
/// Display name used in rendered tables ("Extra Trees").
const char* display_name(ModelKind m) noexcept;

struct DataSource {
    enum class Kind { csv, synthetic };
    Kind kind = Kind::csv;
    std::filesystem::path dir;
    std::vector<std::filesystem::path> files;
    std::optional<std::filesystem::path> manifest;
    std::string label_column = "marker";
    LabelMap label_map;
    SyntheticSpec synthetic;
};

struct ExperimentConfig {
    DataSource data;
    SplitFractions fractions;
    std::uint64_t split_seed = 42;
    std::vector<FeatureSet> feature_sets{FeatureSet::all, FeatureSet::pmu_only};
    std::vector<ModelKind> models{ModelKind::logistic, ModelKind::random_forest, ModelKind::extra_trees};
    ForestConfig extra_trees = ForestConfig::extra_trees();
    ForestConfig random_forest = ForestConfig::random_forest();
    LogisticConfig logistic;
    GaConfig ga;
    std::vector<std::uint64_t> ga_seeds{1, 2, 3, 4, 5};
    FeatureSet ga_feature_set = FeatureSet::pmu_without_status;
    std::filesystem::path output_dir = "results";
    std::size_t threads = 0;

    /// Throws Error(config).
    void validate(bool ga_enabled) const;
};

/// `[section]` headers and `key = value` lines; keys are addressed as
/// "section.key". `#` starts a comment.
class FlatConfig {
public:
    static FlatConfig parse(std::string_view text);
    static FlatConfig load(const std::filesystem::path& path);

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    bool contains(const std::string& key) const { return values_.contains(key); }
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Builds a config from defaults plus the given entries. Unknown keys and
/// malformed values throw Error(config).
ExperimentConfig build_config(const FlatConfig& flat);

/// Inverse of build_config; the result re-parses to an equal config.
FlatConfig to_flat(const ExperimentConfig& cfg);

std::vector<std::string> split_list(std::string_view text);

}  // namespace gridga::harness
