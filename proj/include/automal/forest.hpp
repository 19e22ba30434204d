#pragma once

#include <cstdint>
#include <vector>

#include "automal/tree.hpp"

namespace automal {

enum class ForestMode { random_forest, extra_trees };
enum class FeatureSubset { sqrt, log2, all };

struct ForestParams {
    int n_trees = 100;
    int max_depth = 24;
    int min_samples_leaf = 1;
    FeatureSubset features_per_split = FeatureSubset::sqrt;
    // random_forest bootstraps rows by default; extra_trees does not.
    bool bootstrap = true;
    std::uint64_t seed = 0;
    bool operator==(const ForestParams&) const = default;
};

struct ForestModel {
    std::vector<TreeModel> trees;
    std::vector<std::uint64_t> tree_seeds;
    ForestMode mode = ForestMode::random_forest;
    ForestParams params;
    std::size_t n_features = 0;
    int mtry = 0;  // resolved features-per-split count, 0 = all

    std::array<double, 2> predict_row(const double* x) const;
};

// Trees train independently, each from its own derived seed, into
// preallocated slots — the model is bit-identical for any thread count.
ForestModel train_forest(const Matrix& x, const std::vector<int>& y,
                         const ForestParams& params, ForestMode mode);

int resolve_mtry(FeatureSubset mode, std::size_t n_features);

}  // namespace automal
