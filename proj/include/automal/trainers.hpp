#pragma once

#include <map>
#include <string>
#include <vector>

#include "automal/dataset.hpp"
#include "automal/model.hpp"

namespace automal {

// One roster entry: a family plus string-typed hyperparameters, the common
// currency between config files, the HPO stage, and the trainers.
//
// Recognized keys per family (unknown keys are rejected):
//   tree:          max_depth, min_samples_leaf
//   random_forest: n_trees, max_depth, min_samples_leaf, features_per_split
//                  (sqrt|log2|all), seed
//   extra_trees:   same as random_forest
//   gbt:           n_rounds, learning_rate, max_leaves, max_depth, growth
//                  (leaf|depth), categorical_smoothing (on|off), max_bins
//   knn:           k, metric (euclidean|hamming)
struct MemberConfig {
    ModelFamily family = ModelFamily::tree;
    std::map<std::string, std::string> params;
    std::string name;  // roster label, e.g. "gbt_a"
};

ModelArtifact train_model(const Dataset& ds, const MemberConfig& config);

// Trains every member on the same data. A member that throws is dropped
// with a warning; fewer than two survivors is an error. Weights default to
// uniform and are normalized to sum 1.
ModelArtifact train_voting_ensemble(const Dataset& ds,
                                    const std::vector<MemberConfig>& members,
                                    Voting voting,
                                    std::vector<double> weights = {},
                                    std::vector<std::string>* warnings = nullptr);

// Fixed 6-member roster: tree, random forest, extra trees, two gbt presets
// (A: leaf-wise 31 leaves; B: depth-wise depth 6 with categorical target
// smoothing), and knn.
std::vector<MemberConfig> default_roster(std::uint64_t seed);

}  // namespace automal
