#include "automal/forest.hpp"

#include <cmath>
#include <numeric>

#include "automal/parallel.hpp"
#include "automal/rng.hpp"

namespace automal {

int resolve_mtry(FeatureSubset mode, std::size_t n_features) {
    switch (mode) {
        case FeatureSubset::all:
            return 0;
        case FeatureSubset::sqrt:
            return std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_features))));
        case FeatureSubset::log2:
            return std::max(1, static_cast<int>(std::log2(static_cast<double>(n_features))));
    }
    return 0;
}

ForestModel train_forest(const Matrix& x, const std::vector<int>& y,
                         const ForestParams& params, ForestMode mode) {
    if (params.n_trees < 1) throw ValueError("train_forest: n_trees must be at least 1");
    if (x.rows() == 0) throw ValueError("train_forest: empty training data");

    ForestModel model;
    model.mode = mode;
    model.params = params;
    if (mode == ForestMode::extra_trees) model.params.bootstrap = false;
    model.n_features = x.cols();
    model.mtry = resolve_mtry(params.features_per_split, x.cols());

    const auto n_trees = static_cast<std::size_t>(params.n_trees);
    model.trees.resize(n_trees);
    model.tree_seeds.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t)
        model.tree_seeds[t] = derive_seed(params.seed, t);

    TreeParams tree_params;
    tree_params.max_depth = params.max_depth;
    tree_params.min_samples_leaf = params.min_samples_leaf;
    const bool random_thresholds = mode == ForestMode::extra_trees;
    const bool bootstrap = model.params.bootstrap;

    parallel_for(n_trees, [&](std::size_t t) {
        Rng rng(model.tree_seeds[t]);
        std::vector<std::size_t> rows(x.rows());
        if (bootstrap) {
            for (auto& r : rows) r = static_cast<std::size_t>(rng.below(x.rows()));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        model.trees[t] =
            build_tree(x, y, rows, tree_params, model.mtry, random_thresholds, &rng);
    });
    return model;
}

std::array<double, 2> ForestModel::predict_row(const double* x) const {
    double p0 = 0.0, p1 = 0.0;
    for (const auto& tree : trees) {
        auto p = tree.predict_row(x);
        p0 += p[0];
        p1 += p[1];
    }
    const auto n = static_cast<double>(trees.size());
    return {p0 / n, p1 / n};
}

}  // namespace automal
