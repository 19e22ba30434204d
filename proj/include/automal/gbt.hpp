#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "automal/dataset.hpp"
#include "automal/matrix.hpp"

namespace automal {

enum class GbtGrowth { leaf_wise, depth_wise };

struct GbtParams {
    int n_rounds = 200;
    double learning_rate = 0.1;  // in (0, 1]
    int max_leaves = 31;
    int max_depth = 6;           // binding for depth_wise growth
    int max_bins = 255;
    double l2 = 1.0;
    double min_child_hessian = 1e-3;
    GbtGrowth growth = GbtGrowth::leaf_wise;
    // Preset-B behavior: categorical-encoded columns are re-encoded by a
    // smoothed per-level target mean before binning.
    bool categorical_smoothing = false;
    double smoothing_strength = 10.0;
    bool operator==(const GbtParams&) const = default;
};

struct GbtNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // bin upper edge; x <= threshold goes left
    int left = -1, right = -1;
    double value = 0.0;  // leaf increment, learning rate already applied
};

// Binary log-loss gradient boosting over histogram-binned features with
// second-order (gradient/hessian) leaf values.
struct GbtModel {
    std::vector<std::vector<GbtNode>> trees;
    double init_logodds = 0.0;
    std::vector<std::vector<double>> bin_edges;  // per feature, strictly increasing
    // Per feature: level code -> smoothed target value; empty when the
    // column is not target-encoded. cat_prior is the fallback for unseen
    // codes.
    std::vector<std::vector<double>> cat_encoding;
    double cat_prior = 0.0;
    GbtParams params;
    std::vector<double> logloss_trace;  // training loss after each round
    std::size_t n_features = 0;

    double predict_logodds(const double* x) const;
    std::array<double, 2> predict_row(const double* x) const;
};

// kinds may be empty (all columns treated as numeric). Single-class targets
// produce a constant model at clamped log-odds with no trees.
GbtModel train_gbt(const Matrix& x, const std::vector<int>& y, const GbtParams& params,
                   const std::vector<FeatureKind>& kinds = {});

double sigmoid(double z);

}  // namespace automal
