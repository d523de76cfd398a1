#include "gridga/forest.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "gridga/error.hpp"

namespace gridga {

const char* to_string(ForestMode m) noexcept {
    return m == ForestMode::extra ? "extra" : "random_forest";
}

std::size_t ForestConfig::resolved_max_features(std::size_t n_features) const noexcept {
    if (max_features != 0) return std::min(max_features, n_features);
    const auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features))));
    return std::max<std::size_t>(1, k);
}

bool ForestConfig::resolved_bootstrap() const noexcept {
    return bootstrap.value_or(mode == ForestMode::random_forest);
}

void ForestConfig::validate(std::size_t n_features) const {
    if (n_trees == 0) throw Error(ErrorKind::config, "n_trees must be >= 1");
    if (n_features == 0) throw Error(ErrorKind::config, "forest needs at least one feature");
    if (max_features > n_features)
        throw Error(ErrorKind::config, "max_features " + std::to_string(max_features) + " exceeds " +
                                           std::to_string(n_features) + " features");
    if (min_samples_split < 2) throw Error(ErrorKind::config, "min_samples_split must be >= 2");
    if (min_samples_leaf < 1) throw Error(ErrorKind::config, "min_samples_leaf must be >= 1");
}

ForestConfig ForestConfig::extra_trees(std::uint64_t seed) {
    ForestConfig c;
    c.mode = ForestMode::extra;
    c.seed = seed;
    return c;
}

ForestConfig ForestConfig::random_forest(std::uint64_t seed) {
    ForestConfig c;
    c.mode = ForestMode::random_forest;
    c.seed = seed;
    return c;
}

// ---------------------------------------------------------------------------

std::size_t Tree::depth() const {
    if (nodes_.empty()) return 0;
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes_[i].is_leaf()) {
            stack.emplace_back(i + 1, d + 1);
            stack.emplace_back(nodes_[i].right, d + 1);
        }
    }
    return best;
}

std::size_t Tree::n_leaves() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double Tree::predict_row(const ColumnView& X, std::size_t row) const noexcept {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = X(row, static_cast<std::size_t>(n.feature)) < n.value ? i + 1 : n.right;
    }
    return nodes_[i].value;
}

// ---------------------------------------------------------------------------

namespace {

// 2 * p * (n - p) / n, i.e. n times the Gini impurity.
double weighted_gini(std::size_t n, std::size_t pos) noexcept {
    if (n == 0) return 0.0;
    const auto p = static_cast<double>(pos);
    const auto nn = static_cast<double>(n);
    return 2.0 * p * (nn - p) / nn;
}

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

class TreeBuilder {
public:
    TreeBuilder(const ColumnView& X, std::span<const std::uint8_t> y, const ForestConfig& cfg, Rng& rng)
        : X_(X), y_(y), cfg_(cfg), rng_(rng), max_features_(cfg.resolved_max_features(X.cols())) {
        pool_.resize(X.cols());
        std::iota(pool_.begin(), pool_.end(), 0);
    }

    Tree build(std::span<const std::size_t> rows) {
        rows_.assign(rows.begin(), rows.end());
        nodes_.clear();
        struct Pending {
            std::size_t begin, end, depth;
            std::size_t parent;  // node whose `right` must point here; npos for root/left
        };
        constexpr auto npos = static_cast<std::size_t>(-1);
        std::vector<Pending> stack{{0, rows_.size(), 0, npos}};
        while (!stack.empty()) {
            const Pending p = stack.back();
            stack.pop_back();
            const std::size_t index = nodes_.size();
            if (p.parent != npos) nodes_[p.parent].right = static_cast<std::uint32_t>(index);

            const std::size_t n = p.end - p.begin;
            std::size_t pos = 0;
            for (std::size_t i = p.begin; i < p.end; ++i) pos += y_[rows_[i]];

            const auto split = can_split(n, pos, p.depth) ? best_split(p.begin, p.end) : std::optional<Split>{};
            if (!split) {
                TreeNode leaf;
                leaf.value = n == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(n);
                leaf.count = static_cast<std::uint32_t>(n);
                nodes_.push_back(leaf);
                continue;
            }
            TreeNode node;
            node.feature = static_cast<std::int32_t>(split->feature);
            node.value = split->threshold;
            node.count = static_cast<std::uint32_t>(n);
            nodes_.push_back(node);

            const auto col = X_.column(split->feature);
            const double t = split->threshold;
            const auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(p.begin),
                                            rows_.begin() + static_cast<std::ptrdiff_t>(p.end),
                                            [&](std::size_t r) { return col[r] < t; });
            const auto m = static_cast<std::size_t>(mid - rows_.begin());
            stack.push_back({m, p.end, p.depth + 1, index});
            stack.push_back({p.begin, m, p.depth + 1, npos});
        }
        return Tree(std::move(nodes_));
    }

private:
    bool can_split(std::size_t n, std::size_t pos, std::size_t depth) const noexcept {
        if (pos == 0 || pos == n) return false;
        if (n < cfg_.min_samples_split || n < 2 * cfg_.min_samples_leaf) return false;
        if (cfg_.max_depth && depth >= *cfg_.max_depth) return false;
        return true;
    }

    // Visits features in random order, skipping ones constant on the node,
    // until max_features non-constant candidates have been tried.
    std::optional<Split> best_split(std::size_t begin, std::size_t end) {
        Split best;
        bool found = false;
        std::size_t tried = 0;
        const std::size_t d = pool_.size();
        for (std::size_t i = 0; i < d && tried < max_features_; ++i) {
            const auto j = i + static_cast<std::size_t>(uniform_index(rng_, d - i));
            std::swap(pool_[i], pool_[j]);
            const std::size_t f = pool_[i];
            const auto col = X_.column(f);

            double lo = col[rows_[begin]];
            double hi = lo;
            for (std::size_t k = begin + 1; k < end; ++k) {
                const double v = col[rows_[k]];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (!(hi > lo)) continue;
            ++tried;

            const auto candidate = cfg_.mode == ForestMode::extra ? random_split(f, begin, end, lo, hi)
                                                                   : exhaustive_split(f, begin, end);
            if (candidate && candidate->impurity < best.impurity) {
                best = *candidate;
                found = true;
            }
        }
        if (!found) return std::nullopt;
        return best;
    }

    std::optional<Split> evaluate(std::size_t f, double t, std::size_t n, std::size_t n_left,
                                  std::size_t pos, std::size_t pos_left) const {
        const std::size_t n_right = n - n_left;
        if (n_left < cfg_.min_samples_leaf || n_right < cfg_.min_samples_leaf) return std::nullopt;
        return Split{f, t, weighted_gini(n_left, pos_left) + weighted_gini(n_right, pos - pos_left)};
    }

    std::optional<Split> random_split(std::size_t f, std::size_t begin, std::size_t end, double lo, double hi) {
        double t = lo + uniform01(rng_) * (hi - lo);
        if (t <= lo) t = std::nextafter(lo, hi);
        const auto col = X_.column(f);
        std::size_t n_left = 0, pos = 0, pos_left = 0;
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t r = rows_[k];
            pos += y_[r];
            if (col[r] < t) {
                ++n_left;
                pos_left += y_[r];
            }
        }
        return evaluate(f, t, end - begin, n_left, pos, pos_left);
    }

    std::optional<Split> exhaustive_split(std::size_t f, std::size_t begin, std::size_t end) {
        const auto col = X_.column(f);
        sorted_.clear();
        std::size_t pos = 0;
        for (std::size_t k = begin; k < end; ++k) {
            sorted_.emplace_back(col[rows_[k]], y_[rows_[k]]);
            pos += y_[rows_[k]];
        }
        std::sort(sorted_.begin(), sorted_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        const std::size_t n = sorted_.size();
        std::optional<Split> best;
        std::size_t pos_left = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            pos_left += sorted_[i].second;
            const double a = sorted_[i].first;
            const double b = sorted_[i + 1].first;
            if (!(b > a)) continue;
            double t = a + (b - a) / 2.0;
            if (t <= a) t = b;
            const auto s = evaluate(f, t, n, i + 1, pos, pos_left);
            if (s && (!best || s->impurity < best->impurity)) best = s;
        }
        return best;
    }

    const ColumnView& X_;
    std::span<const std::uint8_t> y_;
    const ForestConfig& cfg_;
    Rng& rng_;
    std::size_t max_features_;
    std::vector<std::size_t> pool_;
    std::vector<std::size_t> rows_;
    std::vector<TreeNode> nodes_;
    std::vector<std::pair<double, std::uint8_t>> sorted_;
};

void check_training_input(const ColumnView& X, std::span<const std::uint8_t> y, const ForestConfig& cfg) {
    if (X.rows() != y.size()) throw Error(ErrorKind::usage, "feature rows and labels differ in length");
    if (X.rows() < 2) throw Error(ErrorKind::training, "forest training needs at least 2 samples");
    cfg.validate(X.cols());
    const auto pos = std::count(y.begin(), y.end(), std::uint8_t{1});
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size()))
        throw Error(ErrorKind::training, "forest training data contains a single class");
    for (std::size_t c = 0; c < X.cols(); ++c)
        for (double v : X.column(c))
            if (!std::isfinite(v)) throw Error(ErrorKind::usage, "forest training data has missing values");
}

std::size_t thread_count(const ForestConfig& cfg) {
    std::size_t n = cfg.n_threads;
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return std::min(n, cfg.n_trees);
}

// Runs job(tree_index) for every tree on a small worker pool.
template <typename Job>
void for_each_tree(const ForestConfig& cfg, Job&& job) {
    const std::size_t workers = thread_count(cfg);
    if (workers <= 1) {
        for (std::size_t t = 0; t < cfg.n_trees; ++t) job(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t t = next++; t < cfg.n_trees; t = next++) {
            try {
                job(t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cfg.n_trees;
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

Tree grow_indexed_tree(const ColumnView& X, std::span<const std::uint8_t> y, const ForestConfig& cfg,
                       std::size_t index) {
    Rng rng(tree_seed(cfg, index));
    std::vector<std::size_t> rows(X.rows());
    if (cfg.resolved_bootstrap()) {
        for (auto& r : rows) r = static_cast<std::size_t>(uniform_index(rng, X.rows()));
    } else {
        std::iota(rows.begin(), rows.end(), 0);
    }
    return grow_tree(X, y, rows, cfg, rng);
}

void check_arity(const ColumnView& X, std::size_t n_features) {
    if (X.cols() != n_features)
        throw Error(ErrorKind::usage, "model expects " + std::to_string(n_features) + " features, got " +
                                          std::to_string(X.cols()));
}

}  // namespace

Tree grow_tree(const ColumnView& X, std::span<const std::uint8_t> y, std::span<const std::size_t> rows,
               const ForestConfig& cfg, Rng& rng) {
    if (rows.empty()) throw Error(ErrorKind::usage, "grow_tree: no rows");
    TreeBuilder builder(X, y, cfg, rng);
    return builder.build(rows);
}

std::uint64_t tree_seed(const ForestConfig& cfg, std::size_t index) noexcept {
    return derive_seed(cfg.seed, index);
}

ForestModel::ForestModel(std::vector<Tree> trees, ForestConfig config, std::size_t n_features)
    : trees_(std::move(trees)), config_(std::move(config)), n_features_(n_features) {}

std::vector<double> ForestModel::predict_proba(const ColumnView& X) const {
    check_arity(X, n_features_);
    if (trees_.empty()) throw Error(ErrorKind::usage, "predict on an empty forest");
    std::vector<double> out(X.rows(), 0.0);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        double sum = 0.0;
        for (const auto& tree : trees_) sum += tree.predict_row(X, r);
        out[r] = sum / static_cast<double>(trees_.size());
    }
    return out;
}

std::vector<std::uint8_t> ForestModel::predict_label(const ColumnView& X, double threshold) const {
    return apply_threshold(predict_proba(X), threshold);
}

std::vector<std::uint8_t> apply_threshold(std::span<const double> scores, double threshold) {
    std::vector<std::uint8_t> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
    return out;
}

ForestModel train_forest(const ColumnView& X, std::span<const std::uint8_t> y, const ForestConfig& cfg) {
    check_training_input(X, y, cfg);
    std::vector<Tree> trees(cfg.n_trees);
    for_each_tree(cfg, [&](std::size_t t) { trees[t] = grow_indexed_tree(X, y, cfg, t); });
    return ForestModel(std::move(trees), cfg, X.cols());
}

std::vector<std::vector<double>> train_and_score(const ColumnView& X, std::span<const std::uint8_t> y,
                                                 const ForestConfig& cfg, std::span<const ColumnView> eval_sets) {
    check_training_input(X, y, cfg);
    for (const auto& e : eval_sets) check_arity(e, X.cols());

    // leaf[s][t * rows + r]: tree t's leaf value for row r of set s.
    std::vector<std::vector<double>> leaf(eval_sets.size());
    for (std::size_t s = 0; s < eval_sets.size(); ++s) leaf[s].resize(cfg.n_trees * eval_sets[s].rows());

    for_each_tree(cfg, [&](std::size_t t) {
        const Tree tree = grow_indexed_tree(X, y, cfg, t);
        for (std::size_t s = 0; s < eval_sets.size(); ++s) {
            const std::size_t rows = eval_sets[s].rows();
            for (std::size_t r = 0; r < rows; ++r) leaf[s][t * rows + r] = tree.predict_row(eval_sets[s], r);
        }
    });

    std::vector<std::vector<double>> scores(eval_sets.size());
    for (std::size_t s = 0; s < eval_sets.size(); ++s) {
        const std::size_t rows = eval_sets[s].rows();
        scores[s].assign(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (std::size_t t = 0; t < cfg.n_trees; ++t) sum += leaf[s][t * rows + r];
            scores[s][r] = sum / static_cast<double>(cfg.n_trees);
        }
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Text format, version 1:
//
//   gridga-forest 1
//   n_features <d>
//   mode <extra|random_forest>
//   n_trees <T>
//   max_features <k>            (0 = sqrt rule)
//   min_samples_split <n>
//   min_samples_leaf <n>
//   max_depth <n|none>
//   bootstrap <0|1|auto>
//   seed <u64>
//   tree <index> <node count>   then one line per node in pre-order:
//     S <feature> <threshold> <right> <count>
//     L <fraction> <count>
//   end

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorKind::schema, "forest file: bad number '" + s + "'");
    return v;
}

template <typename T>
T parse_uint(const std::string& s) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorKind::schema, "forest file: bad integer '" + s + "'");
    return v;
}

std::string expect_key(std::istream& in, const char* key) {
    std::string k, v;
    if (!(in >> k >> v) || k != key) throw Error(ErrorKind::schema, std::string("forest file: expected ") + key);
    return v;
}

}  // namespace

void ForestModel::save(std::ostream& out) const {
    out << "gridga-forest 1\n";
    out << "n_features " << n_features_ << '\n';
    out << "mode " << to_string(config_.mode) << '\n';
    out << "n_trees " << trees_.size() << '\n';
    out << "max_features " << config_.max_features << '\n';
    out << "min_samples_split " << config_.min_samples_split << '\n';
    out << "min_samples_leaf " << config_.min_samples_leaf << '\n';
    out << "max_depth " << (config_.max_depth ? std::to_string(*config_.max_depth) : "none") << '\n';
    out << "bootstrap " << (config_.bootstrap ? (*config_.bootstrap ? "1" : "0") : "auto") << '\n';
    out << "seed " << config_.seed << '\n';
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        const auto& nodes = trees_[t].nodes();
        out << "tree " << t << ' ' << nodes.size() << '\n';
        for (const auto& n : nodes) {
            if (n.is_leaf())
                out << "L " << format_double(n.value) << ' ' << n.count << '\n';
            else
                out << "S " << n.feature << ' ' << format_double(n.value) << ' ' << n.right << ' ' << n.count
                    << '\n';
        }
    }
    out << "end\n";
}

ForestModel ForestModel::load(std::istream& in) {
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "gridga-forest")
        throw Error(ErrorKind::schema, "not a gridga forest file");
    if (version != "1") throw Error(ErrorKind::schema, "unsupported forest file version " + version);

    ForestConfig cfg;
    const auto n_features = parse_uint<std::size_t>(expect_key(in, "n_features"));
    const auto mode = expect_key(in, "mode");
    if (mode == "extra") cfg.mode = ForestMode::extra;
    else if (mode == "random_forest") cfg.mode = ForestMode::random_forest;
    else throw Error(ErrorKind::schema, "forest file: unknown mode " + mode);
    cfg.n_trees = parse_uint<std::size_t>(expect_key(in, "n_trees"));
    cfg.max_features = parse_uint<std::size_t>(expect_key(in, "max_features"));
    cfg.min_samples_split = parse_uint<std::size_t>(expect_key(in, "min_samples_split"));
    cfg.min_samples_leaf = parse_uint<std::size_t>(expect_key(in, "min_samples_leaf"));
    if (const auto v = expect_key(in, "max_depth"); v != "none") cfg.max_depth = parse_uint<std::size_t>(v);
    if (const auto v = expect_key(in, "bootstrap"); v != "auto") cfg.bootstrap = v == "1";
    cfg.seed = parse_uint<std::uint64_t>(expect_key(in, "seed"));

    std::vector<Tree> trees;
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        std::string key, idx, count;
        if (!(in >> key >> idx >> count) || key != "tree" || parse_uint<std::size_t>(idx) != t)
            throw Error(ErrorKind::schema, "forest file: expected tree " + std::to_string(t));
        const auto n_nodes = parse_uint<std::size_t>(count);
        std::vector<TreeNode> nodes(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            std::string kind;
            in >> kind;
            TreeNode& node = nodes[i];
            if (kind == "L") {
                std::string v, c;
                in >> v >> c;
                node.value = parse_double(v);
                node.count = parse_uint<std::uint32_t>(c);
            } else if (kind == "S") {
                std::string f, v, r, c;
                in >> f >> v >> r >> c;
                node.feature = parse_uint<std::int32_t>(f);
                node.value = parse_double(v);
                node.right = parse_uint<std::uint32_t>(r);
                node.count = parse_uint<std::uint32_t>(c);
                if (static_cast<std::size_t>(node.feature) >= n_features || node.right <= i + 1 ||
                    node.right >= n_nodes)
                    throw Error(ErrorKind::schema, "forest file: inconsistent split node");
            } else {
                throw Error(ErrorKind::schema, "forest file: bad node record");
            }
            if (!in) throw Error(ErrorKind::schema, "forest file: truncated");
        }
        trees.emplace_back(std::move(nodes));
    }
    std::string end;
    if (!(in >> end) || end != "end") throw Error(ErrorKind::schema, "forest file: missing end marker");
    return ForestModel(std::move(trees), cfg, n_features);
}

bool operator==(const ForestModel& a, const ForestModel& b) {
    const auto& ca = a.config_;
    const auto& cb = b.config_;
    return a.n_features_ == b.n_features_ && a.trees_ == b.trees_ && ca.mode == cb.mode &&
           ca.n_trees == cb.n_trees && ca.max_features == cb.max_features &&
           ca.min_samples_split == cb.min_samples_split && ca.min_samples_leaf == cb.min_samples_leaf &&
           ca.max_depth == cb.max_depth && ca.bootstrap == cb.bootstrap && ca.seed == cb.seed;
}

}  // namespace gridga
