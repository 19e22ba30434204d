#include "automal/knn.hpp"

#include <algorithm>
#include <cmath>

namespace automal {

KnnModel train_knn(const Matrix& x, const std::vector<int>& y, const KnnParams& params) {
    if (x.rows() == 0) throw ValueError("train_knn: empty training data");
    if (x.rows() != y.size()) throw ValueError("train_knn: label length mismatch");
    if (params.k < 1 || static_cast<std::size_t>(params.k) > x.rows())
        throw ValueError("train_knn: k must lie in [1, rows]");
    KnnModel model;
    model.train_features = x;
    model.train_labels = y;
    model.params = params;
    return model;
}

std::vector<std::size_t> KnnModel::neighbors(const double* x) const {
    const std::size_t n = train_features.rows();
    const std::size_t d = train_features.cols();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = train_features.row_ptr(r);
        double acc = 0.0;
        if (params.metric == KnnMetric::euclidean) {
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = x[c] - row[c];
                acc += diff * diff;
            }
        } else {
            for (std::size_t c = 0; c < d; ++c) acc += x[c] != row[c] ? 1.0 : 0.0;
        }
        dist[r] = {acc, r};
    }
    const auto k = static_cast<std::size_t>(params.k);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

std::array<double, 2> KnnModel::predict_row(const double* x) const {
    auto nn = neighbors(x);
    double votes1 = 0.0;
    for (auto r : nn) votes1 += train_labels[r];
    const double p1 = votes1 / static_cast<double>(nn.size());
    return {1.0 - p1, p1};
}

}  // namespace automal
