#include "automal/model.hpp"

#include <algorithm>
#include <cmath>

#include "automal/parallel.hpp"

namespace automal {

const char* to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::tree: return "tree";
        case ModelFamily::random_forest: return "random_forest";
        case ModelFamily::extra_trees: return "extra_trees";
        case ModelFamily::gbt: return "gbt";
        case ModelFamily::knn: return "knn";
        case ModelFamily::ensemble: return "ensemble";
    }
    return "unknown";
}

ModelFamily model_family_from_string(const std::string& s) {
    if (s == "tree") return ModelFamily::tree;
    if (s == "random_forest") return ModelFamily::random_forest;
    if (s == "extra_trees") return ModelFamily::extra_trees;
    if (s == "gbt") return ModelFamily::gbt;
    if (s == "knn") return ModelFamily::knn;
    if (s == "ensemble") return ModelFamily::ensemble;
    throw ValueError("unknown model family '" + s + "'");
}

namespace {

std::array<double, 2> ensemble_predict(const EnsembleModel& e, const double* x) {
    if (e.voting == Voting::soft) {
        double p0 = 0.0, p1 = 0.0;
        for (std::size_t m = 0; m < e.members.size(); ++m) {
            auto p = e.members[m].predict_row(x);
            p0 += e.weights[m] * p[0];
            p1 += e.weights[m] * p[1];
        }
        return {p0, p1};
    }
    // Hard voting: weighted member labels, exact ties to class 1.
    double votes1 = 0.0;
    for (std::size_t m = 0; m < e.members.size(); ++m) {
        auto p = e.members[m].predict_row(x);
        if (p[1] >= p[0]) votes1 += e.weights[m];
    }
    return {1.0 - votes1, votes1};
}

}  // namespace

std::array<double, 2> ModelArtifact::predict_row(const double* x) const {
    return std::visit(
        [&](const auto& m) -> std::array<double, 2> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, EnsembleModel>)
                return ensemble_predict(m, x);
            else
                return m.predict_row(x);
        },
        model);
}

Matrix predict_proba(const ModelArtifact& model, const Matrix& x) {
    if (model.n_features != 0 && x.cols() != model.n_features)
        throw ValueError("predict_proba: expected " + std::to_string(model.n_features) +
                         " features, got " + std::to_string(x.cols()));
    Matrix out(x.rows(), 2);
    parallel_for(x.rows(), [&](std::size_t r) {
        auto p = model.predict_row(x.row_ptr(r));
        out(r, 0) = p[0];
        out(r, 1) = p[1];
    });
    return out;
}

std::vector<int> hard_labels(const Matrix& proba) {
    std::vector<int> out(proba.rows());
    for (std::size_t r = 0; r < proba.rows(); ++r)
        out[r] = proba(r, 1) >= proba(r, 0) ? 1 : 0;
    return out;
}

std::vector<int> predict_labels(const ModelArtifact& model, const Matrix& x) {
    return hard_labels(predict_proba(model, x));
}

std::vector<double> predict_scores(const ModelArtifact& model, const Matrix& x) {
    Matrix proba = predict_proba(model, x);
    std::vector<double> out(proba.rows());
    for (std::size_t r = 0; r < proba.rows(); ++r) out[r] = proba(r, 1);
    return out;
}

}  // namespace automal
