#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "automal/dataset.hpp"
#include "automal/model.hpp"

namespace automal {

enum class ImportanceMetric { recall, mcc, accuracy, f1 };
const char* to_string(ImportanceMetric m);

struct ImportanceReport {
    std::vector<double> mean_drop;  // baseline metric minus permuted metric
    std::vector<double> std_dev;    // sample std over repeats (0 when repeats = 1)
    int repeats = 0;
    std::uint64_t seed = 0;
    ImportanceMetric metric = ImportanceMetric::recall;
    double baseline = 0.0;

    std::string to_csv(const std::vector<std::string>& feature_names) const;
};

// Mean metric drop over `repeats` independent within-column shuffles per
// feature. Negative drops are reported as-is. (feature, repeat) cells run in
// parallel, each from its own derived seed.
ImportanceReport permutation_importance(const ModelArtifact& model, const Dataset& ds,
                                        ImportanceMetric metric, int repeats,
                                        std::uint64_t seed);

struct LocalExplanation {
    std::vector<double> reference;     // the explained instance
    std::vector<double> coefficients;  // weighted-least-squares surrogate
    double intercept = 0.0;
    double kernel_width = 0.0;
    int n_perturbations = 0;
    double fidelity_r2 = 0.0;  // weighted R^2 on the perturbation sample
    bool fidelity_defined = true;
    bool ridged = false;  // singular design damped with a small ridge
};

// LIME-style surrogate: perturb the instance by flipping binary features /
// resampling others from background marginals (each feature independently
// with probability 1/2), weight samples by exp(-d^2/w^2) on a per-feature
// scale-normalized distance, then fit weighted least squares of the model's
// class-1 probability. Default kernel width is 0.75*sqrt(d).
LocalExplanation local_surrogate(const ModelArtifact& model, std::span<const double> x,
                                 const Dataset& background, int n_perturbations,
                                 double kernel_width, std::uint64_t seed);

enum class AttributionMethod { exact, sampled };

struct Attribution {
    std::vector<double> phi;         // per-feature Shapley value for P(class 1)
    std::vector<double> std_error;   // sampled method only
    double baseline = 0.0;           // mean model output over the background
    double prediction = 0.0;         // model output at x
    AttributionMethod method = AttributionMethod::exact;
    int n_samples = 0;
    std::uint64_t seed = 0;

    double efficiency_residual() const;  // |sum(phi) - (prediction - baseline)|
};

// Full 2^d coalition enumeration with the interventional value function
// v(S) = mean over background rows of f(x_S, b_complement). d <= 12.
Attribution shapley_exact(const ModelArtifact& model, std::span<const double> x,
                          const Dataset& background);

// Permutation-sampling estimator: each sample draws a feature order and one
// background row, walks the order accumulating marginal contributions.
// Reports the per-feature Monte-Carlo standard error. Samples run in
// parallel into independent slots.
Attribution shapley_sampled(const ModelArtifact& model, std::span<const double> x,
                            const Dataset& background, int n_samples, std::uint64_t seed);

std::string attribution_to_csv(const Attribution& a,
                               const std::vector<std::string>& feature_names);

// Graphviz DOT document for a fitted tree: one node per line, split
// predicates on edges, class probabilities at leaves. Thresholds print with
// round-trip precision so a parsed document re-evaluates identically.
std::string export_tree(const TreeModel& tree, const std::vector<std::string>& feature_names);

}  // namespace automal
