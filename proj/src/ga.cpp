#include "gridga/ga.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "gridga/error.hpp"

namespace gridga {

FeatureMask::FeatureMask(std::size_t d, bool value) : bits_(d, value ? 1 : 0), popcount_(value ? d : 0) {}

FeatureMask::FeatureMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) {
        b = b ? 1 : 0;
        popcount_ += b;
    }
}

FeatureMask FeatureMask::from_string(std::string_view bits) {
    std::vector<std::uint8_t> v;
    for (char ch : bits) {
        if (ch != '0' && ch != '1') throw Error(ErrorKind::usage, "mask string must contain only 0 and 1");
        v.push_back(ch == '1');
    }
    return FeatureMask(std::move(v));
}

void FeatureMask::set(std::size_t j, bool value) noexcept {
    const std::uint8_t v = value ? 1 : 0;
    if (bits_[j] == v) return;
    bits_[j] = v;
    if (value) ++popcount_;
    else --popcount_;
}

std::vector<std::size_t> FeatureMask::selected() const {
    std::vector<std::size_t> out;
    out.reserve(popcount_);
    for (std::size_t j = 0; j < bits_.size(); ++j)
        if (bits_[j]) out.push_back(j);
    return out;
}

std::string FeatureMask::to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t j = 0; j < bits_.size(); ++j)
        if (bits_[j]) s[j] = '1';
    return s;
}

std::uint64_t FeatureMask::hash() const noexcept {
    std::uint64_t h = mix64(bits_.size());
    std::uint64_t word = 0;
    for (std::size_t j = 0; j < bits_.size(); ++j) {
        word |= static_cast<std::uint64_t>(bits_[j]) << (j % 64);
        if (j % 64 == 63) {
            h = mix64(h ^ word);
            word = 0;
        }
    }
    return mix64(h ^ word);
}

// ---------------------------------------------------------------------------

ForestConfig GaConfig::reduced_evaluator() {
    ForestConfig c = ForestConfig::extra_trees();
    c.n_trees = 100;
    return c;
}

double GaConfig::resolved_mutation_rate(std::size_t d) const noexcept {
    if (mutation_rate) return *mutation_rate;
    return d == 0 ? 0.0 : 1.0 / static_cast<double>(d);
}

void GaConfig::validate(std::size_t d) const {
    if (population_size < 2) throw Error(ErrorKind::config, "population_size must be >= 2");
    if (elitism_count >= population_size) throw Error(ErrorKind::config, "elitism_count must be < population_size");
    if (tournament_size < 2) throw Error(ErrorKind::config, "tournament_size must be >= 2");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::config, "alpha must be in (0, 1]");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
        throw Error(ErrorKind::config, "crossover_rate must be in [0, 1]");
    if (mutation_rate && !(*mutation_rate >= 0.0 && *mutation_rate <= 1.0))
        throw Error(ErrorKind::config, "mutation_rate must be in [0, 1]");
    if (!(init_inclusion_prob >= 0.0 && init_inclusion_prob <= 1.0))
        throw Error(ErrorKind::config, "init_inclusion_prob must be in [0, 1]");
    if (min_features < 1) throw Error(ErrorKind::config, "min_features must be >= 1");
    if (d < min_features)
        throw Error(ErrorKind::config, "feature count " + std::to_string(d) + " is below min_features " +
                                           std::to_string(min_features));
}

double compactness_fitness(double alpha, double macro_f1, std::size_t popcount, std::size_t d) noexcept {
    return alpha * (1.0 - macro_f1) + (1.0 - alpha) * static_cast<double>(popcount) / static_cast<double>(d);
}

FitnessValue fitness(const FeatureMask& mask, const GaData& data, const GaConfig& cfg) {
    const std::size_t d = data.n_features();
    if (mask.size() != d)
        throw Error(ErrorKind::usage, "mask length " + std::to_string(mask.size()) + " != feature count " +
                                          std::to_string(d));
    if (mask.popcount() == 0) throw Error(ErrorKind::usage, "fitness of an empty mask is undefined");

    const auto cols = mask.selected();
    ForestConfig evaluator = cfg.evaluator;
    evaluator.seed = derive_seed(derive_seed(cfg.seed, cfg.evaluator.seed), mask.hash());

    const std::array<ColumnView, 1> eval{data.validation.select(cols)};
    const auto scores = train_and_score(data.train.select(cols), data.train_labels, evaluator, eval);
    FitnessValue out;
    out.threshold = select_threshold(data.validation_labels, scores[0]);
    out.macro_f1 = macro_f1_at(data.validation_labels, scores[0], out.threshold);
    out.j = compactness_fitness(cfg.alpha, out.macro_f1, mask.popcount(), d);
    return out;
}

// ---------------------------------------------------------------------------

bool fitter(const Individual& a, const Individual& b) noexcept {
    if (a.j != b.j) return a.j < b.j;
    if (a.mask.popcount() != b.mask.popcount()) return a.mask.popcount() < b.mask.popcount();
    return a.index < b.index;
}

void repair(FeatureMask& mask, std::size_t min_features, Rng& rng) {
    if (mask.popcount() >= min_features) return;
    if (mask.size() < min_features) throw Error(ErrorKind::config, "mask shorter than min_features");
    std::vector<std::size_t> unset;
    for (std::size_t j = 0; j < mask.size(); ++j)
        if (!mask.test(j)) unset.push_back(j);
    while (mask.popcount() < min_features) {
        const auto k = static_cast<std::size_t>(uniform_index(rng, unset.size()));
        mask.set(unset[k], true);
        unset[k] = unset.back();
        unset.pop_back();
    }
}

std::vector<FeatureMask> init_population(const GaConfig& cfg, std::size_t d, Rng& rng) {
    cfg.validate(d);
    std::vector<FeatureMask> population;
    population.reserve(cfg.population_size);
    for (std::size_t p = 0; p < cfg.population_size; ++p) {
        FeatureMask mask(d);
        for (std::size_t j = 0; j < d; ++j) mask.set(j, bernoulli(rng, cfg.init_inclusion_prob));
        repair(mask, cfg.min_features, rng);
        population.push_back(std::move(mask));
    }
    return population;
}

std::size_t tournament(std::span<const Individual> population, std::size_t size, Rng& rng) {
    if (population.empty()) throw Error(ErrorKind::usage, "tournament on an empty population");
    size = std::min(size, population.size());
    // Distinct contestants via a partial Fisher-Yates over indices.
    std::vector<std::size_t> idx(population.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::size_t winner = population.size();
    for (std::size_t k = 0; k < size; ++k) {
        const auto j = k + static_cast<std::size_t>(uniform_index(rng, idx.size() - k));
        std::swap(idx[k], idx[j]);
        if (winner == population.size() || fitter(population[idx[k]], population[winner])) winner = idx[k];
    }
    return winner;
}

std::pair<FeatureMask, FeatureMask> uniform_crossover(const FeatureMask& a, const FeatureMask& b, Rng& rng) {
    if (a.size() != b.size()) throw Error(ErrorKind::usage, "crossover of masks with different lengths");
    FeatureMask c1 = a;
    FeatureMask c2 = b;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (bernoulli(rng, 0.5)) {
            c1.set(j, b.test(j));
            c2.set(j, a.test(j));
        }
    }
    return {std::move(c1), std::move(c2)};
}

void mutate(FeatureMask& mask, double rate, Rng& rng) {
    for (std::size_t j = 0; j < mask.size(); ++j)
        if (bernoulli(rng, rate)) mask.flip(j);
}

std::vector<FeatureMask> next_generation(std::span<const Individual> population, const GaConfig& cfg,
                                         Rng& rng) {
    if (population.empty()) throw Error(ErrorKind::usage, "next_generation of an empty population");
    const std::size_t d = population.front().mask.size();
    const std::size_t target = cfg.population_size;
    const double rate = cfg.resolved_mutation_rate(d);

    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fitter(population[a], population[b]); });

    std::vector<FeatureMask> next;
    next.reserve(target);
    for (std::size_t e = 0; e < std::min(cfg.elitism_count, order.size()) && next.size() < target; ++e)
        next.push_back(population[order[e]].mask);

    while (next.size() < target) {
        const auto& pa = population[tournament(population, cfg.tournament_size, rng)].mask;
        const auto& pb = population[tournament(population, cfg.tournament_size, rng)].mask;
        auto [c1, c2] = bernoulli(rng, cfg.crossover_rate) ? uniform_crossover(pa, pb, rng)
                                                           : std::pair<FeatureMask, FeatureMask>{pa, pb};
        for (auto* child : {&c1, &c2}) {
            if (next.size() == target) break;
            mutate(*child, rate, rng);
            repair(*child, cfg.min_features, rng);
            next.push_back(std::move(*child));
        }
    }
    return next;
}

// ---------------------------------------------------------------------------

namespace {

GenerationStats summarize(std::size_t generation, std::span<const Individual> population, const Individual& best_ever) {
    GenerationStats s;
    s.generation = generation;
    const auto best = std::min_element(population.begin(), population.end(), fitter);
    s.best_j = best->j;
    s.best_popcount = best->mask.popcount();
    double sum = 0.0;
    for (const auto& ind : population) sum += ind.j;
    s.mean_j = sum / static_cast<double>(population.size());
    s.best_ever_j = best_ever.j;
    return s;
}

}  // namespace

GaSearchResult search(std::size_t d, const GaConfig& cfg, const FitnessFunction& evaluate) {
    cfg.validate(d);
    Rng rng(derive_seed(cfg.seed, 0x6761));  // GA operator stream

    GaSearchResult result;
    std::map<FeatureMask, FitnessValue> cache;
    std::size_t created = 0;
    bool have_best = false;

    auto make = [&](FeatureMask mask) {
        Individual ind;
        if (mask.popcount() < cfg.min_features)
            throw Error(ErrorKind::usage, "individual violates min_features");
        if (const auto it = cache.find(mask); it != cache.end()) {
            ++result.cache_hits;
            ind.j = it->second.j;
            ind.macro_f1 = it->second.macro_f1;
        } else {
            const FitnessValue v = evaluate(mask);
            ++result.evaluations;
            cache.emplace(mask, v);
            ind.j = v.j;
            ind.macro_f1 = v.macro_f1;
        }
        ind.mask = std::move(mask);
        ind.index = created++;
        if (!have_best || fitter(ind, result.best)) {
            result.best = ind;
            have_best = true;
        }
        return ind;
    };

    std::vector<Individual> population;
    for (auto& mask : init_population(cfg, d, rng)) population.push_back(make(std::move(mask)));
    result.history.push_back(summarize(0, population, result.best));

    for (std::size_t g = 1; g <= cfg.generations; ++g) {
        auto masks = next_generation(population, cfg, rng);

        // Elites carry over as the same individuals (same creation index).
        std::vector<Individual> sorted = population;
        std::sort(sorted.begin(), sorted.end(), fitter);
        const std::size_t n_elite = std::min(cfg.elitism_count, sorted.size());

        std::vector<Individual> next;
        next.reserve(masks.size());
        for (std::size_t i = 0; i < masks.size(); ++i) {
            if (i < n_elite) next.push_back(sorted[i]);
            else next.push_back(make(std::move(masks[i])));
        }
        population = std::move(next);
        result.history.push_back(summarize(g, population, result.best));
    }
    return result;
}

GaResult run_ga(const GaSplits& splits, const GaConfig& cfg) {
    const std::size_t d = splits.train.n_features();
    if (splits.validation.n_features() != d || splits.test.n_features() != d)
        throw Error(ErrorKind::usage, "train/validation/test feature counts differ");
    cfg.validate(d);

    const ColumnView train(splits.train.values());
    const ColumnView validation(splits.validation.values());
    const ColumnView test(splits.test.values());
    const GaData data{train, splits.train.labels(), validation, splits.validation.labels()};

    const auto found = search(d, cfg, [&](const FeatureMask& m) { return fitness(m, data, cfg); });

    GaResult result;
    result.best_mask = found.best.mask;
    result.best_j = found.best.j;
    result.best_validation_macro_f1 = found.best.macro_f1;
    result.history = found.history;
    result.evaluations = found.evaluations;
    result.cache_hits = found.cache_hits;
    const auto cols = result.best_mask.selected();
    for (auto c : cols) result.selected_features.push_back(splits.train.feature_names()[c]);

    ForestConfig final_cfg = cfg.final_classifier;
    final_cfg.seed = derive_seed(cfg.final_classifier.seed, cfg.seed);
    const std::array<ColumnView, 2> eval{validation.select(cols), test.select(cols)};
    const auto scores = train_and_score(train.select(cols), splits.train.labels(), final_cfg, eval);
    const double threshold = select_threshold(splits.validation.labels(), scores[0]);
    result.test_report = evaluate_scores(splits.test.labels(), scores[1], threshold);
    result.test_confusion = confusion(splits.test.labels(), apply_threshold(scores[1], threshold));
    return result;
}

}  // namespace gridga
