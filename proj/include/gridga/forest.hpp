#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridga/matrix.hpp"
#include "gridga/random.hpp"

namespace gridga {

enum class ForestMode : std::uint8_t { extra, random_forest };

const char* to_string(ForestMode m) noexcept;

struct ForestConfig {
    std::size_t n_trees = 300;
    ForestMode mode = ForestMode::extra;
    /// 0 selects floor(sqrt(d')), at least 1.
    std::size_t max_features = 0;
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    std::optional<std::size_t> max_depth;
    /// Unset: false for extra, true for random_forest.
    std::optional<bool> bootstrap;
    std::uint64_t seed = 0;
    /// Worker threads for tree growth; 0 = hardware concurrency. Output does
    /// not depend on this value.
    std::size_t n_threads = 0;

    std::size_t resolved_max_features(std::size_t n_features) const noexcept;
    bool resolved_bootstrap() const noexcept;
    /// Throws Error(config) on invalid values.
    void validate(std::size_t n_features) const;

    static ForestConfig extra_trees(std::uint64_t seed = 0);
    static ForestConfig random_forest(std::uint64_t seed = 0);
};

/// Pre-order flat tree. Internal node: feature >= 0, left child at index+1,
/// right child at `right`, rows with value < threshold go left. Leaf:
/// feature < 0, `value` is the positive-class fraction, `count` the number of
/// training samples that reached it.
struct TreeNode {
    std::int32_t feature = -1;
    std::uint32_t right = 0;
    double value = 0.0;  // threshold (internal) or positive fraction (leaf)
    std::uint32_t count = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class Tree {
public:
    Tree() = default;
    explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::vector<TreeNode>& nodes() noexcept { return nodes_; }
    std::size_t depth() const;
    std::size_t n_leaves() const;

    /// Positive fraction of the leaf `row` of `X` falls into.
    double predict_row(const ColumnView& X, std::size_t row) const noexcept;

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

/// Grows one tree on `rows` of `X` (duplicates allowed, as produced by a
/// bootstrap). `X` must be free of missing values.
Tree grow_tree(const ColumnView& X, std::span<const std::uint8_t> y,
               std::span<const std::size_t> rows, const ForestConfig& cfg, Rng& rng);

class ForestModel {
public:
    ForestModel() = default;
    ForestModel(std::vector<Tree> trees, ForestConfig config, std::size_t n_features);

    const std::vector<Tree>& trees() const noexcept { return trees_; }
    const ForestConfig& config() const noexcept { return config_; }
    std::size_t n_features() const noexcept { return n_features_; }

    /// Per-row mean of leaf fractions, summed in tree order.
    std::vector<double> predict_proba(const ColumnView& X) const;
    std::vector<double> predict_proba(const Matrix& X) const { return predict_proba(ColumnView(X)); }
    std::vector<std::uint8_t> predict_label(const ColumnView& X, double threshold) const;

    /// Versioned text dump, doubles in shortest round-trip form.
    void save(std::ostream& out) const;
    static ForestModel load(std::istream& in);

    friend bool operator==(const ForestModel& a, const ForestModel& b);

private:
    std::vector<Tree> trees_;
    ForestConfig config_;
    std::size_t n_features_ = 0;
};

/// Seed of tree `index`: derive_seed(cfg.seed, index). Bootstrap rows, if
/// any, are drawn from the same per-tree stream before growth.
std::uint64_t tree_seed(const ForestConfig& cfg, std::size_t index) noexcept;

ForestModel train_forest(const ColumnView& X, std::span<const std::uint8_t> y, const ForestConfig& cfg);
inline ForestModel train_forest(const Matrix& X, std::span<const std::uint8_t> y,
                                const ForestConfig& cfg) {
    return train_forest(ColumnView(X), y, cfg);
}

/// Trains the same trees as train_forest but scores `eval_sets` tree by tree
/// and discards each tree afterwards. Scores are bit-identical to
/// train_forest(...).predict_proba(eval_sets[k]).
std::vector<std::vector<double>> train_and_score(const ColumnView& X, std::span<const std::uint8_t> y,
                                                 const ForestConfig& cfg,
                                                 std::span<const ColumnView> eval_sets);

std::vector<std::uint8_t> apply_threshold(std::span<const double> scores, double threshold);

}  // namespace gridga
