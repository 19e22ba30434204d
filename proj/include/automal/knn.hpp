#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "automal/matrix.hpp"

namespace automal {

enum class KnnMetric { euclidean, hamming };

struct KnnParams {
    int k = 5;
    KnnMetric metric = KnnMetric::euclidean;
    bool operator==(const KnnParams&) const = default;
};

// Lazy learner: stores the training set; prediction is the neighbor vote
// with distance ties broken toward the lower training-row index.
struct KnnModel {
    Matrix train_features;
    std::vector<int> train_labels;
    KnnParams params;

    std::array<double, 2> predict_row(const double* x) const;
    // The k nearest training rows by (distance, index).
    std::vector<std::size_t> neighbors(const double* x) const;
};

KnnModel train_knn(const Matrix& x, const std::vector<int>& y, const KnnParams& params);

}  // namespace automal
