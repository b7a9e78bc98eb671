#include "spikeforge/forest.hpp"

#include <algorithm>
#include <numeric>

#include "spikeforge/rng.hpp"

namespace spikeforge {

namespace {

struct Counts {
    std::size_t n0 = 0;
    std::size_t n1 = 0;

    std::size_t total() const { return n0 + n1; }
    int majority() const { return n1 > n0 ? 1 : 0; }
    bool pure() const { return n0 == 0 || n1 == 0; }
};

Counts count_labels(const std::vector<int>& labels, const std::vector<Eigen::Index>& idx)
{
    Counts c;
    for (Eigen::Index i : idx) (labels[static_cast<std::size_t>(i)] == 1 ? c.n1 : c.n0)++;
    return c;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

SplitChoice best_split(const MatrixRef& features, const std::vector<int>& labels,
                       const std::vector<Eigen::Index>& idx, const Counts& node)
{
    SplitChoice best;
    const double node_gini = gini_impurity(node.n0, node.n1);
    const auto n = static_cast<double>(idx.size());

    std::vector<Eigen::Index> order(idx);
    for (int f = 0; f < features.cols(); ++f) {
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return features(a, f) < features(b, f);
        });
        Counts left;
        for (std::size_t i = 1; i < order.size(); ++i) {
            const int y = labels[static_cast<std::size_t>(order[i - 1])];
            (y == 1 ? left.n1 : left.n0)++;
            const double lo = features(order[i - 1], f);
            const double hi = features(order[i], f);
            if (lo == hi) continue;
            const Counts right{node.n0 - left.n0, node.n1 - left.n1};
            const double decrease =
                node_gini -
                (static_cast<double>(left.total()) / n) * gini_impurity(left.n0, left.n1) -
                (static_cast<double>(right.total()) / n) *
                    gini_impurity(right.n0, right.n1);
            if (decrease > best.decrease + 1e-15) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (lo + hi);
                best.decrease = decrease;
            }
        }
    }
    return best;
}

int build_node(Tree& tree, const MatrixRef& features, const std::vector<int>& labels,
               const std::vector<Eigen::Index>& idx, int depth, int max_depth)
{
    const Counts node = count_labels(labels, idx);
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    SplitChoice split;
    if (depth < max_depth && !node.pure()) split = best_split(features, labels, idx, node);
    if (!split.found) {
        tree.nodes[node_id].leaf_class = node.majority();
        return node_id;
    }

    std::vector<Eigen::Index> left_idx, right_idx;
    for (Eigen::Index i : idx)
        (features(i, split.feature) <= split.threshold ? left_idx : right_idx)
            .push_back(i);

    tree.nodes[node_id].feature = split.feature;
    tree.nodes[node_id].threshold = split.threshold;
    tree.nodes[node_id].left =
        build_node(tree, features, labels, left_idx, depth + 1, max_depth);
    tree.nodes[node_id].right =
        build_node(tree, features, labels, right_idx, depth + 1, max_depth);
    return node_id;
}

}  // namespace

double gini_impurity(std::size_t n0, std::size_t n1)
{
    const std::size_t n = n0 + n1;
    if (n == 0) return 0.0;
    const double p0 = static_cast<double>(n0) / static_cast<double>(n);
    const double p1 = static_cast<double>(n1) / static_cast<double>(n);
    return 1.0 - p0 * p0 - p1 * p1;
}

ForestModel forest_fit(const MatrixRef& features, const std::vector<int>& labels,
                       const ForestConfig& cfg)
{
    const auto n = static_cast<std::size_t>(features.rows());
    if (n < 2) throw std::invalid_argument("forest_fit: need at least 2 samples");
    if (labels.size() != n)
        throw shape_error("forest_fit: label count does not match feature rows");
    if (cfg.n_trees < 1 || cfg.max_depth < 0)
        throw std::invalid_argument("forest_fit: bad forest configuration");
    for (int y : labels)
        if (y != 0 && y != 1)
            throw std::invalid_argument("forest_fit: labels must be 0 or 1");

    bool single_class = true;
    for (std::size_t i = 1; i < n && single_class; ++i)
        single_class = labels[i] == labels[0];
    if (single_class)
        log_warning("forest_fit: single-class training data, trees degenerate to "
                    "majority stumps");

    ForestModel model;
    model.n_features = static_cast<int>(features.cols());
    model.cfg = cfg;
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        Rng rng(Rng::derive_seed(cfg.seed, t));
        std::vector<Eigen::Index> idx(n);
        for (auto& i : idx)
            i = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        build_node(model.trees[t], features, labels, idx, 0, cfg.max_depth);
    }
    return model;
}

int tree_predict(const Tree& tree, const VectorRef& x)
{
    if (tree.nodes.empty()) throw state_error("tree_predict: empty tree");
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
        if (nd.feature >= x.size()) throw shape_error("tree_predict: feature index out of range");
        node = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].leaf_class;
}

int forest_predict(const ForestModel& model, const VectorRef& x)
{
    if (!model.fitted()) throw state_error("forest_predict: model has no trees");
    if (x.size() != model.n_features)
        throw shape_error("forest_predict: feature vector length mismatch");
    std::size_t votes1 = 0;
    for (const Tree& t : model.trees)
        if (tree_predict(t, x) == 1) ++votes1;
    return 2 * votes1 > model.trees.size() ? 1 : 0;
}

}  // namespace spikeforge
