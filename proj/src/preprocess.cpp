#include "gridga/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridga/error.hpp"
#include "gridga/random.hpp"

namespace gridga {

Dataset sanitize(const Dataset& ds) {
    Matrix values = ds.values();
    for (std::size_t c = 0; c < values.cols(); ++c)
        for (auto& v : values.column(c))
            if (std::isinf(v)) v = kMissing;
    return ds.with_values(std::move(values));
}

ImputationModel fit_imputer(const Dataset& ds, std::span<const std::size_t> rows) {
    if (rows.empty()) throw Error(ErrorKind::usage, "fit_imputer: no training rows");
    ImputationModel model;
    model.medians.resize(ds.n_features());
    std::vector<double> finite;
    finite.reserve(rows.size());
    for (std::size_t c = 0; c < ds.n_features(); ++c) {
        const auto col = ds.values().column(c);
        finite.clear();
        for (auto r : rows) {
            if (r >= ds.n_samples()) throw Error(ErrorKind::usage, "fit_imputer: row index out of range");
            if (std::isfinite(col[r])) finite.push_back(col[r]);
        }
        if (finite.empty()) {
            model.medians[c] = 0.0;
            model.fallback_columns.push_back(c);
            model.warnings.push_back("column '" + ds.feature_names()[c] +
                                     "' has no finite training value; imputing 0.0");
            continue;
        }
        const auto mid = finite.size() / 2;
        std::nth_element(finite.begin(), finite.begin() + static_cast<std::ptrdiff_t>(mid), finite.end());
        double median = finite[mid];
        if (finite.size() % 2 == 0) {
            const double lower = *std::max_element(finite.begin(), finite.begin() + static_cast<std::ptrdiff_t>(mid));
            median = lower + (median - lower) / 2.0;
        }
        model.medians[c] = median;
    }
    return model;
}

Dataset apply_imputer(const ImputationModel& model, const Dataset& ds) {
    if (model.medians.size() != ds.n_features())
        throw Error(ErrorKind::usage, "apply_imputer: model has " + std::to_string(model.medians.size()) +
                                          " columns, dataset has " + std::to_string(ds.n_features()));
    Matrix values = ds.values();
    for (std::size_t c = 0; c < values.cols(); ++c)
        for (auto& v : values.column(c))
            if (!std::isfinite(v)) v = model.medians[c];
    return ds.with_values(std::move(values));
}

std::array<std::size_t, 3> apportion(std::size_t n, const SplitFractions& f) {
    const std::array<double, 3> fractions{f.train, f.validation, f.test};
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainders{};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double quota = static_cast<double>(n) * fractions[i];
        // Guard against quotas like 9.9999999999 that are really integers.
        double whole = std::floor(quota + 1e-9);
        counts[i] = static_cast<std::size_t>(whole);
        remainders[i] = std::max(0.0, quota - whole);
        assigned += counts[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainders[a] > remainders[b] + 1e-9;
    });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
    return counts;
}

SplitIndices stratified_split(std::span<const std::uint8_t> labels, const SplitFractions& fractions,
                              std::uint64_t seed) {
    const double sum = fractions.train + fractions.validation + fractions.test;
    if (!(fractions.train > 0 && fractions.validation > 0 && fractions.test > 0) || std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorKind::usage, "split fractions must be positive and sum to 1");

    SplitIndices out;
    for (std::uint8_t cls : {kNatural, kAttack}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        if (members.size() < 3)
            throw Error(ErrorKind::stratification,
                        std::string("class ") + (cls == kAttack ? "Attack" : "Natural") + " has " +
                            std::to_string(members.size()) + " samples; stratified split needs at least 3");
        Rng rng(derive_seed(seed, cls));
        shuffle(members, rng);
        const auto counts = apportion(members.size(), fractions);
        const std::array<std::vector<std::size_t>*, 3> parts{&out.train, &out.validation, &out.test};
        auto it = members.begin();
        for (std::size_t p = 0; p < 3; ++p) {
            const auto k = static_cast<std::ptrdiff_t>(counts[p]);
            parts[p]->insert(parts[p]->end(), it, it + k);
            it += k;
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

PreparedSplits prepare_splits(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed) {
    if (ds.n_samples() == 0) throw Error(ErrorKind::usage, "dataset is empty");
    const Dataset clean = sanitize(ds);
    PreparedSplits out;
    out.indices = stratified_split(clean.labels(), fractions, seed);
    out.imputer = fit_imputer(clean, out.indices.train);
    out.train = apply_imputer(out.imputer, clean.take_rows(out.indices.train));
    out.validation = apply_imputer(out.imputer, clean.take_rows(out.indices.validation));
    out.test = apply_imputer(out.imputer, clean.take_rows(out.indices.test));
    return out;
}

}  // namespace gridga
