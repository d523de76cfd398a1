#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridga/dataset.hpp"
#include "gridga/forest.hpp"
#include "gridga/metrics.hpp"
#include "gridga/random.hpp"

namespace gridga {

/// Bit vector over the active feature set with a cached popcount.
class FeatureMask {
public:
    FeatureMask() = default;
    explicit FeatureMask(std::size_t d, bool value = false);
    explicit FeatureMask(std::vector<std::uint8_t> bits);
    /// "10110" (first character is feature 0).
    static FeatureMask from_string(std::string_view bits);

    std::size_t size() const noexcept { return bits_.size(); }
    std::size_t popcount() const noexcept { return popcount_; }
    bool test(std::size_t j) const noexcept { return bits_[j] != 0; }
    void set(std::size_t j, bool value) noexcept;
    void flip(std::size_t j) noexcept { set(j, !test(j)); }

    std::vector<std::size_t> selected() const;
    std::string to_string() const;
    std::uint64_t hash() const noexcept;

    friend bool operator==(const FeatureMask& a, const FeatureMask& b) { return a.bits_ == b.bits_; }
    friend bool operator<(const FeatureMask& a, const FeatureMask& b) { return a.bits_ < b.bits_; }

private:
    std::vector<std::uint8_t> bits_;
    std::size_t popcount_ = 0;
};

struct GaConfig {
    std::size_t population_size = 40;
    std::size_t generations = 30;
    double alpha = 0.95;
    std::size_t tournament_size = 3;
    double crossover_rate = 0.9;
    /// Per-bit flip probability; unset means 1/d.
    std::optional<double> mutation_rate;
    std::size_t elitism_count = 2;
    std::size_t min_features = 5;
    double init_inclusion_prob = 0.5;
    std::uint64_t seed = 1;
    /// Classifier trained for every fitness evaluation.
    ForestConfig evaluator = reduced_evaluator();
    /// Classifier trained once on the winning mask.
    ForestConfig final_classifier = ForestConfig::extra_trees();

    double resolved_mutation_rate(std::size_t d) const noexcept;
    /// Throws Error(config).
    void validate(std::size_t d) const;

    static ForestConfig reduced_evaluator();
};

/// J = alpha * (1 - macro_f1) + (1 - alpha) * popcount / d.
double compactness_fitness(double alpha, double macro_f1, std::size_t popcount, std::size_t d) noexcept;

/// Imputed parts the GA works on; all share one column space of width d.
struct GaData {
    ColumnView train;
    std::span<const std::uint8_t> train_labels;
    ColumnView validation;
    std::span<const std::uint8_t> validation_labels;
    std::size_t n_features() const noexcept { return train.cols(); }
};

struct FitnessValue {
    double j = 0.0;
    double macro_f1 = 0.0;
    double threshold = 0.5;
};

/// Trains cfg.evaluator on the masked training columns, picks the validation
/// threshold and returns J. The evaluator seed is derived from (cfg.seed,
/// mask), so equal masks always yield equal J. Throws Error(usage) on an
/// empty mask.
FitnessValue fitness(const FeatureMask& mask, const GaData& data, const GaConfig& cfg);

/// An evaluated population member. `index` is its creation order in the run.
struct Individual {
    FeatureMask mask;
    double j = 0.0;
    double macro_f1 = 0.0;
    std::size_t index = 0;
};

/// Total order used for ranking: lower J, then lower popcount, then lower index.
bool fitter(const Individual& a, const Individual& b) noexcept;

/// Forces popcount >= min_features by setting uniformly chosen unset bits.
void repair(FeatureMask& mask, std::size_t min_features, Rng& rng);

std::vector<FeatureMask> init_population(const GaConfig& cfg, std::size_t d, Rng& rng);

/// Index (into population) of a tournament winner.
std::size_t tournament(std::span<const Individual> population, std::size_t size, Rng& rng);

/// Uniform crossover; child b takes the bit child a did not.
std::pair<FeatureMask, FeatureMask> uniform_crossover(const FeatureMask& a, const FeatureMask& b, Rng& rng);

void mutate(FeatureMask& mask, double rate, Rng& rng);

/// Elites first (fitter order), then offspring. Only masks are produced;
/// the caller evaluates them.
std::vector<FeatureMask> next_generation(std::span<const Individual> population, const GaConfig& cfg,
                                         Rng& rng);

struct GenerationStats {
    std::size_t generation = 0;
    double best_j = 0.0;
    double mean_j = 0.0;
    std::size_t best_popcount = 0;
    double best_ever_j = 0.0;
};

/// Outcome of the search itself (no final classifier).
struct GaSearchResult {
    Individual best;
    std::vector<GenerationStats> history;
    std::size_t evaluations = 0;
    std::size_t cache_hits = 0;
};

/// Fitness oracle used by the search. Default: `fitness` on GaData.
using FitnessFunction = std::function<FitnessValue(const FeatureMask&)>;

/// Generations 0..G. Each distinct mask is evaluated once (cache keyed by
/// the bit vector). Throws Error(config) if d < min_features.
GaSearchResult search(std::size_t d, const GaConfig& cfg, const FitnessFunction& evaluate);

struct GaResult {
    FeatureMask best_mask;
    double best_j = 0.0;
    double best_validation_macro_f1 = 0.0;
    std::vector<GenerationStats> history;
    std::vector<std::string> selected_features;
    MetricsReport test_report;
    ConfusionCounts test_confusion;
    std::size_t evaluations = 0;
    std::size_t cache_hits = 0;
};

struct GaSplits {
    const Dataset& train;
    const Dataset& validation;
    const Dataset& test;
};

/// Search, then retrain cfg.final_classifier on z* and report test metrics
/// at the validation-selected threshold.
GaResult run_ga(const GaSplits& splits, const GaConfig& cfg);

}  // namespace gridga
