#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "automal/dataset.hpp"
#include "automal/trainers.hpp"

namespace automal {

struct IntRange {
    long long lo = 0, hi = 0;  // inclusive
    long long step = 1;
};
struct RealRange {
    double lo = 0.0, hi = 0.0;
    bool log_scale = false;
};
struct Categorical {
    std::vector<std::string> choices;
};

struct ParamSpec {
    std::string name;
    std::variant<IntRange, RealRange, Categorical> domain;
};

struct SearchSpace {
    ModelFamily family = ModelFamily::tree;
    std::vector<ParamSpec> params;

    // name of the budget-bearing parameter (gbt rounds, forest trees), empty
    // when the family has none and pruning degenerates to a single rung
    std::string budget_param;
};

// Documented default spaces:
//   tree:   max_depth 2..20, min_samples_leaf 1..50
//   forest: n_trees 50..400, features_per_split {sqrt,log2,all}, max_depth 4..24
//   gbt:    n_rounds 50..500, learning_rate 0.01..0.3 (log), max_leaves 15..127
//   knn:    k in {1,3,...,25}, metric {euclidean,hamming}
SearchSpace default_space(ModelFamily family);

// Uniform draw from every parameter domain (log-uniform where tagged).
std::map<std::string, std::string> sample_params(const SearchSpace& space, std::uint64_t seed);

enum class TrialStatus { complete, pruned, failed };

struct Trial {
    int id = 0;
    std::map<std::string, std::string> params;
    double objective = 0.0;  // validation malware recall
    double secondary = 0.0;  // validation MCC
    long long budget_consumed = 0;
    TrialStatus status = TrialStatus::complete;
    bool guard_rejected = false;  // complete but below the MCC floor
    std::string error;
};

struct StudyResult {
    std::vector<Trial> trials;
    int best_trial_id = -1;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;

    const Trial& best() const;
};

struct OptimizeOptions {
    int n_trials = 50;
    std::uint64_t seed = 0;
    bool pruner = false;
    int eta = 2;
    int rungs = 3;
    // Complete trials below this validation MCC cannot become best
    // (guards against all-positive degenerate classifiers). Negative
    // disables the guard.
    double min_mcc_guard = 0.05;
};

using Validation = std::variant<SplitPlan, FoldPlan>;

// Seeded random search maximizing validation recall, MCC as tie-break, then
// the lower trial id. With the pruner on, trials run through geometrically
// growing budget rungs and stop early when below the median of previous
// trials' scores at that rung. Trials execute in id order; training inside
// a trial is parallel.
StudyResult optimize(const Dataset& ds, const SearchSpace& space,
                     const Validation& validation, const OptimizeOptions& options,
                     const MemberConfig& base_config,
                     const std::function<void(const Trial&)>& on_trial = nullptr);

// Budgets multiply by eta per rung and end at max_budget; survivor fraction
// is 1/eta at every rung.
std::vector<std::pair<long long, double>> halving_schedule(long long max_budget, int eta,
                                                           int rungs);

}  // namespace automal
