#include "doctest.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "spikeforge/forest.hpp"
#include "spikeforge/rng.hpp"

using namespace spikeforge;

namespace {

bool node_depth_ok(const Tree& tree, int node, int depth, int max_depth)
{
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.feature < 0) return depth <= max_depth;
    if (depth >= max_depth) return false;
    return node_depth_ok(tree, nd.left, depth + 1, max_depth) &&
           node_depth_ok(tree, nd.right, depth + 1, max_depth);
}

bool trees_equal(const Tree& a, const Tree& b)
{
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const TreeNode& x = a.nodes[i];
        const TreeNode& y = b.nodes[i];
        if (x.feature != y.feature || x.threshold != y.threshold ||
            x.left != y.left || x.right != y.right || x.leaf_class != y.leaf_class)
            return false;
    }
    return true;
}

Tree leaf_tree(int cls)
{
    Tree t;
    t.nodes.emplace_back();
    t.nodes.back().leaf_class = cls;
    return t;
}

}  // namespace

TEST_CASE("gini impurity fixtures")
{
    CHECK(gini_impurity(0, 0) == 0.0);
    CHECK(gini_impurity(10, 0) == 0.0);
    CHECK(gini_impurity(0, 7) == 0.0);
    CHECK(gini_impurity(5, 5) == 0.5);
    CHECK(gini_impurity(3, 1) == doctest::Approx(0.375).epsilon(1e-15));
    for (std::size_t a : {1u, 4u, 9u})
        for (std::size_t b : {2u, 5u, 11u}) {
            CHECK(gini_impurity(a, b) ==
                  doctest::Approx(gini_impurity(b, a)).epsilon(1e-15));
            CHECK(gini_impurity(a, b) <= 0.5);
            CHECK(gini_impurity(a, b) > 0.0);
        }
}

TEST_CASE("a clean 1-D threshold is learned exactly")
{
    Matrix features(40, 1);
    std::vector<int> labels(40);
    Rng rng(61);
    for (int i = 0; i < 40; ++i) {
        const int y = i % 2;
        features(i, 0) = y == 0 ? rng.uniform(0.0, 0.4) : rng.uniform(0.6, 1.0);
        labels[static_cast<std::size_t>(i)] = y;
    }

    ForestConfig cfg;
    cfg.n_trees = 25;
    cfg.seed = 62;
    const ForestModel model = forest_fit(features, labels, cfg);
    CHECK(model.fitted());
    CHECK(model.n_features == 1);

    for (int i = 0; i < 40; ++i)
        CHECK(forest_predict(model, features.row(i).transpose().eval()) ==
              labels[static_cast<std::size_t>(i)]);
}

TEST_CASE("split thresholds are midpoints of adjacent distinct values")
{
    Matrix features(4, 1);
    features << 1.0, 2.0, 3.0, 4.0;
    std::vector<int> labels = {0, 0, 1, 1};

    ForestConfig cfg;
    cfg.n_trees = 50;
    cfg.max_depth = 3;
    cfg.seed = 63;
    const ForestModel model = forest_fit(features, labels, cfg);

    // Bootstrap resamples can skip values, so thresholds are midpoints of
    // any pair of distinct original values, not only table-adjacent ones.
    const std::set<double> midpoints = {1.5, 2.0, 2.5, 3.0, 3.5};
    std::size_t n_splits = 0;
    for (const Tree& t : model.trees)
        for (const TreeNode& nd : t.nodes)
            if (nd.feature >= 0) {
                ++n_splits;
                CHECK(nd.feature == 0);
                CHECK(midpoints.count(nd.threshold) == 1);
            }
    CHECK(n_splits > 0);
}

TEST_CASE("depth 2 is enough for an AND concept")
{
    Matrix features(40, 2);
    std::vector<int> labels(40);
    Rng rng(64);
    for (int i = 0; i < 40; ++i) {
        const bool hi0 = i % 2 == 0;
        const bool hi1 = (i / 2) % 2 == 0;
        features(i, 0) = hi0 ? rng.uniform(0.7, 1.0) : rng.uniform(0.0, 0.3);
        features(i, 1) = hi1 ? rng.uniform(0.7, 1.0) : rng.uniform(0.0, 0.3);
        labels[static_cast<std::size_t>(i)] = hi0 && hi1 ? 1 : 0;
    }

    ForestConfig cfg;
    cfg.n_trees = 50;
    cfg.max_depth = 2;
    cfg.seed = 65;
    const ForestModel model = forest_fit(features, labels, cfg);
    for (int i = 0; i < 40; ++i)
        CHECK(forest_predict(model, features.row(i).transpose().eval()) ==
              labels[static_cast<std::size_t>(i)]);
}

TEST_CASE("max_depth bounds every tree")
{
    Rng rng(66);
    Matrix features(60, 3);
    std::vector<int> labels(60);
    for (int i = 0; i < 60; ++i) {
        for (int f = 0; f < 3; ++f) features(i, f) = rng.uniform();
        labels[static_cast<std::size_t>(i)] = rng.uniform() < 0.5 ? 1 : 0;
    }

    for (int depth : {0, 1, 2, 4}) {
        ForestConfig cfg;
        cfg.n_trees = 10;
        cfg.max_depth = depth;
        cfg.seed = 67;
        const ForestModel model = forest_fit(features, labels, cfg);
        for (const Tree& t : model.trees) CHECK(node_depth_ok(t, 0, 0, depth));
    }
}

TEST_CASE("depth 0 yields majority stumps")
{
    Matrix features(40, 2);
    std::vector<int> labels(40);
    Rng rng(68);
    for (int i = 0; i < 40; ++i) {
        features(i, 0) = rng.uniform();
        features(i, 1) = rng.uniform();
        labels[static_cast<std::size_t>(i)] = i < 10 ? 1 : 0;
    }

    ForestConfig cfg;
    cfg.n_trees = 30;
    cfg.max_depth = 0;
    cfg.seed = 69;
    const ForestModel model = forest_fit(features, labels, cfg);
    for (const Tree& t : model.trees) {
        REQUIRE(t.nodes.size() == 1);
        CHECK(t.nodes[0].feature == -1);
    }
    Vector x = Vector::Constant(2, 0.5);
    CHECK(forest_predict(model, x) == 0);
}

TEST_CASE("vote ties resolve to class 0")
{
    ForestModel model;
    model.n_features = 1;
    model.trees = {leaf_tree(1), leaf_tree(0)};
    Vector x = Vector::Zero(1);
    CHECK(forest_predict(model, x) == 0);

    model.trees = {leaf_tree(1), leaf_tree(1)};
    CHECK(forest_predict(model, x) == 1);

    model.trees = {leaf_tree(1), leaf_tree(0), leaf_tree(1)};
    CHECK(forest_predict(model, x) == 1);
}

TEST_CASE("prediction is invariant to tree order and tree duplication")
{
    Rng rng(70);
    Matrix features(50, 4);
    std::vector<int> labels(50);
    for (int i = 0; i < 50; ++i) {
        for (int f = 0; f < 4; ++f) features(i, f) = rng.uniform();
        labels[static_cast<std::size_t>(i)] =
            features(i, 0) + features(i, 2) > 1.0 ? 1 : 0;
    }
    ForestConfig cfg;
    cfg.n_trees = 21;
    cfg.seed = 71;
    const ForestModel model = forest_fit(features, labels, cfg);

    ForestModel reversed = model;
    std::reverse(reversed.trees.begin(), reversed.trees.end());
    ForestModel doubled = model;
    doubled.trees.insert(doubled.trees.end(), model.trees.begin(),
                         model.trees.end());

    for (int rep = 0; rep < 20; ++rep) {
        Vector x(4);
        for (int f = 0; f < 4; ++f) x(f) = rng.uniform();
        const int base = forest_predict(model, x);
        CHECK(forest_predict(reversed, x) == base);
        CHECK(forest_predict(doubled, x) == base);
    }
}

TEST_CASE("fitting is deterministic in the seed")
{
    Rng rng(72);
    Matrix features(30, 2);
    std::vector<int> labels(30);
    for (int i = 0; i < 30; ++i) {
        features(i, 0) = rng.uniform();
        features(i, 1) = rng.uniform();
        labels[static_cast<std::size_t>(i)] = features(i, 0) > 0.5 ? 1 : 0;
    }
    ForestConfig cfg;
    cfg.n_trees = 15;
    cfg.seed = 73;
    const ForestModel a = forest_fit(features, labels, cfg);
    const ForestModel b = forest_fit(features, labels, cfg);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t)
        CHECK(trees_equal(a.trees[t], b.trees[t]));

    cfg.seed = 74;
    const ForestModel c = forest_fit(features, labels, cfg);
    bool any_diff = false;
    for (std::size_t t = 0; t < a.trees.size() && !any_diff; ++t)
        any_diff = !trees_equal(a.trees[t], c.trees[t]);
    CHECK(any_diff);
}

TEST_CASE("single-class data degrades to warned majority stumps")
{
    std::vector<std::string> warnings;
    set_warning_sink([&](const std::string& msg) { warnings.push_back(msg); });

    Matrix features(10, 2);
    std::vector<int> labels(10, 0);
    Rng rng(75);
    for (int i = 0; i < 10; ++i) {
        features(i, 0) = rng.uniform();
        features(i, 1) = rng.uniform();
    }
    ForestConfig cfg;
    cfg.n_trees = 5;
    cfg.seed = 76;
    const ForestModel model = forest_fit(features, labels, cfg);
    set_warning_sink(nullptr);

    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("single-class") != std::string::npos);
    Vector x = Vector::Constant(2, 0.4);
    CHECK(forest_predict(model, x) == 0);
    for (const Tree& t : model.trees) CHECK(t.nodes.size() == 1);
}

TEST_CASE("forest validation and state errors")
{
    Matrix features(4, 2);
    features << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8;
    std::vector<int> labels = {0, 1, 0, 1};
    ForestConfig cfg;
    cfg.n_trees = 3;
    cfg.seed = 77;

    Matrix one_row = features.topRows(1);
    std::vector<int> one_label = {0};
    CHECK_THROWS_AS(forest_fit(one_row, one_label, cfg), std::invalid_argument);

    std::vector<int> short_labels = {0, 1};
    CHECK_THROWS_AS(forest_fit(features, short_labels, cfg), shape_error);

    std::vector<int> bad_labels = {0, 1, 2, 1};
    CHECK_THROWS_AS(forest_fit(features, bad_labels, cfg), std::invalid_argument);

    ForestConfig bad_cfg = cfg;
    bad_cfg.n_trees = 0;
    CHECK_THROWS_AS(forest_fit(features, labels, bad_cfg), std::invalid_argument);
    bad_cfg = cfg;
    bad_cfg.max_depth = -1;
    CHECK_THROWS_AS(forest_fit(features, labels, bad_cfg), std::invalid_argument);

    ForestModel unfitted;
    Vector x = Vector::Zero(2);
    CHECK_THROWS_AS(forest_predict(unfitted, x), state_error);
    Tree empty;
    CHECK_THROWS_AS(tree_predict(empty, x), state_error);

    const ForestModel model = forest_fit(features, labels, cfg);
    Vector wrong = Vector::Zero(3);
    CHECK_THROWS_AS(forest_predict(model, wrong), shape_error);

    Tree dangling = leaf_tree(0);
    dangling.nodes[0].feature = 5;
    dangling.nodes[0].left = 0;
    dangling.nodes[0].right = 0;
    CHECK_THROWS_AS(tree_predict(dangling, x), shape_error);
}
