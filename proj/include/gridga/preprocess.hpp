#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gridga/dataset.hpp"

namespace gridga {

/// Replaces +-inf with the missing sentinel. Finite cells and labels untouched.
Dataset sanitize(const Dataset& ds);

struct ImputationModel {
    std::vector<double> medians;
    /// Columns with no finite training value (median fell back to 0.0).
    std::vector<std::size_t> fallback_columns;
    std::vector<std::string> warnings;
};

/// Per-column median over the finite values of `rows`. Even counts use the
/// midpoint of the central pair.
ImputationModel fit_imputer(const Dataset& ds, std::span<const std::size_t> rows);

/// Replaces every non-finite cell with its column median.
Dataset apply_imputer(const ImputationModel& model, const Dataset& ds);

struct SplitFractions {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Largest-remainder apportionment of `n` items over the fractions. Ties in
/// the remainder go to the earlier part (train, then validation).
std::array<std::size_t, 3> apportion(std::size_t n, const SplitFractions& fractions);

/// Per-class seeded shuffle, per-class apportionment, merged. Each part is
/// returned in ascending row order.
SplitIndices stratified_split(std::span<const std::uint8_t> labels,
                              const SplitFractions& fractions, std::uint64_t seed);

/// Imputed train/validation/test parts of one dataset.
struct PreparedSplits {
    Dataset train;
    Dataset validation;
    Dataset test;
    SplitIndices indices;
    ImputationModel imputer;
};

/// sanitize -> split -> fit_imputer(train) -> apply_imputer(each part).
PreparedSplits prepare_splits(const Dataset& ds, const SplitFractions& fractions,
                              std::uint64_t seed);

}  // namespace gridga
