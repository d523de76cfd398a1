#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"

#include "gridga/error.hpp"
#include "gridga/forest.hpp"
#include "gridga/metrics.hpp"
#include "gridga/preprocess.hpp"
#include "gridga/random.hpp"

using namespace gridga;
using Labels = std::vector<std::uint8_t>;

namespace {

struct Fixture {
    Matrix x;
    Labels y;
};

Fixture noisy(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Fixture f{Matrix(n, d), Labels(n)};
    for (std::size_t i = 0; i < n; ++i) {
        f.y[i] = bernoulli(rng, 0.4);
        for (std::size_t j = 0; j < d; ++j) f.x(i, j) = standard_normal(rng) + (j < 2 && f.y[i] ? 1.0 : 0.0);
    }
    return f;
}

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), 0);
    return r;
}

ForestConfig small(ForestMode mode, std::size_t trees, std::uint64_t seed = 3) {
    ForestConfig c = mode == ForestMode::extra ? ForestConfig::extra_trees(seed) : ForestConfig::random_forest(seed);
    c.n_trees = trees;
    return c;
}

}  // namespace

TEST_CASE("config defaults and validation") {
    const auto et = ForestConfig::extra_trees();
    CHECK(et.n_trees == 300);
    CHECK_FALSE(et.resolved_bootstrap());
    CHECK(ForestConfig::random_forest().resolved_bootstrap());
    CHECK(et.resolved_max_features(112) == 10);
    CHECK(et.resolved_max_features(1) == 1);
    CHECK(et.resolved_max_features(3) == 1);
    ForestConfig bad = et;
    bad.n_trees = 0;
    CHECK_THROWS_AS(bad.validate(4), Error);
    bad = et;
    bad.max_features = 9;
    CHECK_THROWS_AS(bad.validate(4), Error);
    bad = et;
    bad.min_samples_leaf = 0;
    CHECK_THROWS_AS(bad.validate(4), Error);
}

TEST_CASE("pure node becomes a single leaf") {
    const auto f = noisy(20, 3, 1);
    for (std::uint8_t c : {0, 1}) {
        const Labels y(20, c);
        Rng rng(1);
        const auto t = grow_tree(ColumnView(f.x), y, iota_rows(20), small(ForestMode::extra, 1), rng);
        REQUIRE(t.nodes().size() == 1);
        CHECK(t.nodes()[0].value == c);
        CHECK(t.nodes()[0].count == 20);
    }
}

TEST_CASE("constant features with mixed labels give a mean leaf") {
    Matrix x(8, 2, 3.0);
    const Labels y{1, 0, 0, 1, 1, 0, 0, 0};
    for (auto mode : {ForestMode::extra, ForestMode::random_forest}) {
        Rng rng(2);
        auto cfg = small(mode, 1);
        cfg.bootstrap = false;
        const auto t = grow_tree(ColumnView(x), y, iota_rows(8), cfg, rng);
        REQUIRE(t.nodes().size() == 1);
        CHECK(t.nodes()[0].value == 3.0 / 8);
    }
}

TEST_CASE("single separable feature is fitted exactly") {
    const std::size_t n = 40;
    Matrix x(n, 1);
    Labels y(n);
    Rng rng(5);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = uniform01(rng) * 2 - 1;
        y[i] = x(i, 0) >= 0;
    }
    for (auto mode : {ForestMode::extra, ForestMode::random_forest}) {
        auto cfg = small(mode, 1);
        cfg.bootstrap = false;
        Rng r(7);
        const auto t = grow_tree(ColumnView(x), y, iota_rows(n), cfg, r);
        const ColumnView v(x);
        for (std::size_t i = 0; i < n; ++i) CHECK(t.predict_row(v, i) == y[i]);
    }
}

TEST_CASE("leaf size and depth limits hold") {
    const auto f = noisy(300, 6, 9);
    auto cfg = small(ForestMode::extra, 5);
    cfg.min_samples_leaf = 7;
    cfg.max_depth = 4;
    const auto model = train_forest(f.x, f.y, cfg);
    for (const auto& t : model.trees()) {
        CHECK(t.depth() <= 4);
        std::size_t total = 0;
        for (const auto& node : t.nodes())
            if (node.is_leaf()) {
                CHECK(node.count >= 7);
                total += node.count;
            }
        CHECK(total == 300);
    }
}

TEST_CASE("hand-built forests average leaf fractions") {
    Matrix x(1, 1, 0.0);
    const Tree zero({TreeNode{-1, 0, 0.0, 1}});
    const Tree one({TreeNode{-1, 0, 1.0, 1}});
    CHECK(ForestModel({zero, one}, ForestConfig::extra_trees(), 1).predict_proba(x)[0] == 0.5);
    CHECK(ForestModel({one, one, one}, ForestConfig::extra_trees(), 1).predict_proba(x)[0] == 1.0);

    // x < 0.5 goes left.
    const Tree split({TreeNode{0, 2, 0.5, 2}, TreeNode{-1, 0, 0.25, 1}, TreeNode{-1, 0, 0.75, 1}});
    Matrix probe(2, 1);
    probe(0, 0) = 0.4999;
    probe(1, 0) = 0.5;
    const auto p = ForestModel({split}, ForestConfig::extra_trees(), 1).predict_proba(probe);
    CHECK(p[0] == 0.25);
    CHECK(p[1] == 0.75);
}

TEST_CASE("predict_label boundaries") {
    const auto f = noisy(120, 4, 2);
    const auto model = train_forest(f.x, f.y, small(ForestMode::extra, 10));
    const auto scores = model.predict_proba(f.x);
    const double top = *std::max_element(scores.begin(), scores.end());
    const auto all = model.predict_label(ColumnView(f.x), 0.0);
    CHECK(std::all_of(all.begin(), all.end(), [](auto v) { return v == 1; }));
    const auto none = model.predict_label(ColumnView(f.x), std::nextafter(top, 2.0));
    CHECK(std::all_of(none.begin(), none.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("training is deterministic across runs and thread counts") {
    const auto f = noisy(250, 8, 4);
    const auto probe = noisy(80, 8, 5);
    for (auto mode : {ForestMode::extra, ForestMode::random_forest}) {
        auto cfg = small(mode, 24);
        cfg.n_threads = 1;
        const auto a = train_forest(f.x, f.y, cfg);
        const auto b = train_forest(f.x, f.y, cfg);
        cfg.n_threads = 7;
        const auto c = train_forest(f.x, f.y, cfg);
        CHECK(a == b);
        CHECK(a.trees() == c.trees());
        CHECK(a.predict_proba(probe.x) == c.predict_proba(probe.x));
    }
}

TEST_CASE("one-tree forests repeat exactly") {
    const auto f = noisy(100, 5, 6);
    const auto probe = noisy(50, 5, 7);
    const auto cfg = small(ForestMode::extra, 1, 42);
    CHECK(train_forest(f.x, f.y, cfg).predict_proba(probe.x) == train_forest(f.x, f.y, cfg).predict_proba(probe.x));
}

TEST_CASE("Extra Trees ignore training row order without bootstrap") {
    const auto f = noisy(150, 6, 10);
    const auto probe = noisy(60, 6, 11);
    auto rows = iota_rows(150);
    Rng rng(12);
    shuffle(rows, rng);
    const Matrix xp = f.x.take_rows(rows);
    Labels yp(150);
    for (std::size_t i = 0; i < 150; ++i) yp[i] = f.y[rows[i]];
    const auto cfg = small(ForestMode::extra, 15);
    CHECK(train_forest(f.x, f.y, cfg).predict_proba(probe.x) == train_forest(xp, yp, cfg).predict_proba(probe.x));
}

TEST_CASE("one more tree moves each score by at most 1/(T+1)") {
    const auto f = noisy(200, 5, 13);
    const auto probe = noisy(100, 5, 14);
    const std::size_t T = 12;
    const auto big = train_forest(f.x, f.y, small(ForestMode::extra, T + 1));
    const std::vector<Tree> first(big.trees().begin(), big.trees().begin() + T);
    const auto fewer = ForestModel(first, big.config(), 5).predict_proba(probe.x);
    const auto more = big.predict_proba(probe.x);
    for (std::size_t i = 0; i < more.size(); ++i)
        CHECK(std::abs(more[i] - fewer[i]) <= 1.0 / (T + 1) + 1e-15);
}

TEST_CASE("predictions depend only on comparisons") {
    const auto f = noisy(200, 5, 15);
    const auto probe = noisy(100, 5, 16);
    const auto model = train_forest(f.x, f.y, small(ForestMode::random_forest, 8));
    for (double k : {2.0, 0.25, 1024.0}) {
        auto trees = model.trees();
        for (auto& t : trees)
            for (auto& node : t.nodes())
                if (!node.is_leaf()) node.value *= k;
        Matrix scaled = probe.x;
        for (std::size_t j = 0; j < scaled.cols(); ++j)
            for (double& v : scaled.column(j)) v *= k;
        CHECK(ForestModel(trees, model.config(), 5).predict_proba(scaled) == model.predict_proba(probe.x));
    }
}

TEST_CASE("save and load round trip") {
    const auto f = noisy(120, 4, 17);
    auto cfg = small(ForestMode::random_forest, 6);
    cfg.max_depth = 5;
    const auto model = train_forest(f.x, f.y, cfg);
    std::stringstream ss;
    model.save(ss);
    const auto back = ForestModel::load(ss);
    CHECK(back == model);
    CHECK(back.predict_proba(f.x) == model.predict_proba(f.x));
    std::stringstream junk("not a forest");
    CHECK_THROWS_AS(ForestModel::load(junk), Error);
}

TEST_CASE("train_and_score equals train_forest then predict_proba") {
    const auto f = noisy(200, 7, 18);
    const auto a = noisy(50, 7, 19);
    const auto b = noisy(30, 7, 20);
    for (auto mode : {ForestMode::extra, ForestMode::random_forest}) {
        const auto cfg = small(mode, 20);
        const std::vector<ColumnView> eval{ColumnView(a.x), ColumnView(b.x)};
        const auto scores = train_and_score(ColumnView(f.x), f.y, cfg, eval);
        const auto model = train_forest(f.x, f.y, cfg);
        CHECK(scores[0] == model.predict_proba(a.x));
        CHECK(scores[1] == model.predict_proba(b.x));
    }
}

TEST_CASE("training input errors") {
    auto kind = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::io;
    };
    Matrix x(4, 1, 1.0);
    const auto cfg = small(ForestMode::extra, 2);
    CHECK(kind([&] { train_forest(x, Labels{1, 1, 1, 1}, cfg); }) == ErrorKind::training);
    CHECK(kind([&] { train_forest(Matrix(1, 1), Labels{1}, cfg); }) == ErrorKind::training);
    CHECK(kind([&] { train_forest(x, Labels{1, 0}, cfg); }) == ErrorKind::usage);
    x(2, 0) = kMissing;
    CHECK(kind([&] { train_forest(x, Labels{1, 0, 1, 0}, cfg); }) == ErrorKind::usage);
}

TEST_CASE("Extra Trees separate the synthetic benchmark stand-in") {
    SyntheticSpec spec;
    spec.n_samples = 2000;
    spec.n_informative = 5;
    spec.n_redundant = 5;
    spec.n_noise = 40;
    spec.separation = 2.0;
    spec.seed = 7;
    const auto p = prepare_splits(generate_synthetic(spec), {}, 42);
    const std::vector<ColumnView> eval{ColumnView(p.validation.values()), ColumnView(p.test.values())};
    const auto scores = train_and_score(ColumnView(p.train.values()), p.train.labels(), ForestConfig::extra_trees(0), eval);
    const double t = select_threshold(p.validation.labels(), scores[0]);
    CHECK(evaluate_scores(p.test.labels(), scores[1], t).accuracy > 0.95);
}
