#pragma once

#include <cstdint>
#include <vector>

#include "spikeforge/types.hpp"

namespace spikeforge {

/// Node of an axis-aligned binary decision tree, stored in a flat vector.
/// feature == -1 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 4;
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<Tree> trees;
    int n_features = 0;
    ForestConfig cfg;

    bool fitted() const { return !trees.empty(); }
};

/// Gini impurity 1 - sum_k p_k^2 of a two-class node.
double gini_impurity(std::size_t n0, std::size_t n1);

/// Fits n_trees trees, each on a bootstrap resample (n draws with
/// replacement). Splits greedily maximize the Gini impurity decrease over
/// thresholds placed at midpoints of consecutive distinct feature values;
/// leaves predict the majority class (ties -> 0). Labels must be 0 or 1;
/// single-class data yields majority stumps and logs a warning.
ForestModel forest_fit(const MatrixRef& features, const std::vector<int>& labels,
                       const ForestConfig& cfg);

int tree_predict(const Tree& tree, const VectorRef& x);

/// Majority vote over the trees; ties -> class 0. Throws state_error when the
/// model has no trees.
int forest_predict(const ForestModel& model, const VectorRef& x);

}  // namespace spikeforge
