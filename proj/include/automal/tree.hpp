#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "automal/matrix.hpp"

namespace automal {

struct TreeParams {
    int max_depth = 64;
    int min_samples_leaf = 1;
    bool operator==(const TreeParams&) const = default;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double prob[2] = {0.0, 0.0};  // leaf class probabilities, sum 1
    std::uint32_t n_samples = 0;
};

// Greedy CART with Gini impurity. Inputs must be finite (the preprocessing
// stage imputes missing cells first). At every node the (feature, threshold)
// pair maximizing
//     (c0L^2 + c1L^2)/nL + (c0R^2 + c1R^2)/nR
// wins (equivalent to minimizing weighted Gini); thresholds are midpoints
// between adjacent distinct values, predicate "x <= threshold" goes left.
// Ties break toward the lower feature index, then the lower threshold. The
// score is a fixed expression of integer counts, so split choice is exact
// and invariant to training row order.
struct TreeModel {
    std::vector<TreeNode> nodes;  // preorder, root at 0
    std::size_t n_features = 0;
    TreeParams params;
    std::size_t train_rows = 0;

    std::array<double, 2> predict_row(const double* x) const;
    std::vector<int> used_features() const;  // sorted, unique
    int depth() const;
};

TreeModel train_decision_tree(const Matrix& x, const std::vector<int>& y,
                              const TreeParams& params = {});

class Rng;

// Shared builder for plain CART and the forest variants. rows may contain
// repeats (bootstrap sampling). mtry = 0 considers every feature; otherwise
// a fresh feature subset is drawn at each node from rng. random_thresholds
// switches to the extra-trees rule: one threshold per candidate feature,
// drawn uniformly over the node's value range.
TreeModel build_tree(const Matrix& x, const std::vector<int>& y,
                     const std::vector<std::size_t>& rows, const TreeParams& params,
                     int mtry, bool random_thresholds, Rng* rng);

}  // namespace automal
