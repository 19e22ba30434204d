#pragma once

#include <functional>

#include "automal/dataset.hpp"
#include "automal/explain.hpp"
#include "automal/forest.hpp"
#include "automal/model.hpp"

namespace automal::ref {

// Plain single-threaded implementations of the parallel kernels. They share
// the per-item code with the OpenMP paths but drive the loops serially, so
// tests can assert the parallel results are bit-identical and the benchmark
// can compare wall times.

Matrix predict_proba(const ModelArtifact& model, const Matrix& x);

ForestModel train_forest(const Matrix& x, const std::vector<int>& y,
                         const ForestParams& params, ForestMode mode);

ImportanceReport permutation_importance(const ModelArtifact& model, const Dataset& ds,
                                        ImportanceMetric metric, int repeats,
                                        std::uint64_t seed);

Attribution shapley_sampled(const ModelArtifact& model, std::span<const double> x,
                            const Dataset& background, int n_samples, std::uint64_t seed);

double sum(std::size_t n, const std::function<double(std::size_t)>& fn);

}  // namespace automal::ref
