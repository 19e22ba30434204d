#include "automal/serial_ref.hpp"

#include <cmath>
#include <numeric>

#include "automal/metrics.hpp"
#include "automal/parallel.hpp"
#include "automal/rng.hpp"

namespace automal::ref {

Matrix predict_proba(const ModelArtifact& model, const Matrix& x) {
    if (model.n_features != 0 && x.cols() != model.n_features)
        throw ValueError("ref::predict_proba: dimension mismatch");
    Matrix out(x.rows(), 2);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto p = model.predict_row(x.row_ptr(r));
        out(r, 0) = p[0];
        out(r, 1) = p[1];
    }
    return out;
}

ForestModel train_forest(const Matrix& x, const std::vector<int>& y,
                         const ForestParams& params, ForestMode mode) {
    if (params.n_trees < 1) throw ValueError("ref::train_forest: n_trees must be >= 1");
    ForestModel model;
    model.mode = mode;
    model.params = params;
    if (mode == ForestMode::extra_trees) model.params.bootstrap = false;
    model.n_features = x.cols();
    model.mtry = resolve_mtry(params.features_per_split, x.cols());

    TreeParams tree_params;
    tree_params.max_depth = params.max_depth;
    tree_params.min_samples_leaf = params.min_samples_leaf;

    for (int t = 0; t < params.n_trees; ++t) {
        const std::uint64_t seed = derive_seed(params.seed, static_cast<std::uint64_t>(t));
        model.tree_seeds.push_back(seed);
        Rng rng(seed);
        std::vector<std::size_t> rows(x.rows());
        if (model.params.bootstrap) {
            for (auto& r : rows) r = static_cast<std::size_t>(rng.below(x.rows()));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        model.trees.push_back(build_tree(x, y, rows, tree_params, model.mtry,
                                         mode == ForestMode::extra_trees, &rng));
    }
    return model;
}

ImportanceReport permutation_importance(const ModelArtifact& model, const Dataset& ds,
                                        ImportanceMetric metric, int repeats,
                                        std::uint64_t seed) {
    if (repeats < 1) throw ValueError("ref::permutation_importance: repeats must be >= 1");
    const std::size_t d = ds.n_cols(), n = ds.n_rows();
    const auto r_count = static_cast<std::size_t>(repeats);

    auto metric_of = [&](const Matrix& features) {
        const MetricSet m = classification_metrics(
            confusion(ds.labels, hard_labels(ref::predict_proba(model, features))));
        switch (metric) {
            case ImportanceMetric::recall: return m.recall;
            case ImportanceMetric::mcc: return m.mcc;
            case ImportanceMetric::accuracy: return m.accuracy;
            case ImportanceMetric::f1: return m.f1;
        }
        return 0.0;
    };

    ImportanceReport report;
    report.metric = metric;
    report.repeats = repeats;
    report.seed = seed;
    report.baseline = metric_of(ds.features);
    report.mean_drop.assign(d, 0.0);
    report.std_dev.assign(d, 0.0);

    for (std::size_t c = 0; c < d; ++c) {
        std::vector<double> drops(r_count);
        for (std::size_t rep = 0; rep < r_count; ++rep) {
            Rng rng(derive_seed(seed, c * r_count + rep));
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            Matrix shuffled = ds.features;
            for (std::size_t r = 0; r < n; ++r) shuffled(r, c) = ds.features(perm[r], c);
            drops[rep] = report.baseline - metric_of(shuffled);
        }
        double mean = 0.0;
        for (double v : drops) mean += v;
        mean /= static_cast<double>(r_count);
        report.mean_drop[c] = mean;
        if (r_count > 1) {
            double ss = 0.0;
            for (double v : drops) ss += (v - mean) * (v - mean);
            report.std_dev[c] = std::sqrt(ss / static_cast<double>(r_count - 1));
        }
    }
    return report;
}

Attribution shapley_sampled(const ModelArtifact& model, std::span<const double> x,
                            const Dataset& background, int n_samples, std::uint64_t seed) {
    const std::size_t d = x.size();
    if (n_samples < 1) throw ValueError("ref::shapley_sampled: n_samples must be >= 1");

    Attribution a;
    a.method = AttributionMethod::sampled;
    a.n_samples = n_samples;
    a.seed = seed;
    a.phi.assign(d, 0.0);
    a.std_error.assign(d, 0.0);

    double baseline = 0.0;
    {
        std::vector<double> point(d);
        for (std::size_t b = 0; b < background.n_rows(); ++b) {
            for (std::size_t c = 0; c < d; ++c) point[c] = background.features(b, c);
            baseline += model.predict_row(point.data())[1];
        }
        baseline /= static_cast<double>(background.n_rows());
    }
    a.baseline = baseline;
    a.prediction = model.predict_row(x.data())[1];

    const auto n = static_cast<std::size_t>(n_samples);
    std::vector<double> contrib(n * d);
    for (std::size_t s = 0; s < n; ++s) {
        Rng rng(derive_seed(seed, s));
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        const auto b = static_cast<std::size_t>(rng.below(background.n_rows()));
        std::vector<double> point(d);
        for (std::size_t c = 0; c < d; ++c) point[c] = background.features(b, c);
        double prev = model.predict_row(point.data())[1];
        for (auto j : order) {
            point[j] = x[j];
            const double cur = model.predict_row(point.data())[1];
            contrib[s * d + j] = cur - prev;
            prev = cur;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t s = 0; s < n; ++s) mean += contrib[s * d + j];
        mean /= static_cast<double>(n);
        a.phi[j] = mean;
        if (n > 1) {
            double ss = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                const double dv = contrib[s * d + j] - mean;
                ss += dv * dv;
            }
            a.std_error[j] =
                std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
        }
    }
    return a;
}

double sum(std::size_t n, const std::function<double(std::size_t)>& fn) {
    // Same fixed chunking as parallel_sum, folded serially.
    double total = 0.0;
    std::size_t i = 0;
    while (i < n) {
        const std::size_t hi = std::min(i + kReduceChunk, n);
        double acc = 0.0;
        for (; i < hi; ++i) acc += fn(i);
        total += acc;
    }
    return total;
}

}  // namespace automal::ref
