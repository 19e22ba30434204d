#include "automal/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "automal/metrics.hpp"
#include "automal/parallel.hpp"
#include "automal/rng.hpp"

namespace automal {

const char* to_string(ImportanceMetric m) {
    switch (m) {
        case ImportanceMetric::recall: return "recall";
        case ImportanceMetric::mcc: return "mcc";
        case ImportanceMetric::accuracy: return "accuracy";
        case ImportanceMetric::f1: return "f1";
    }
    return "unknown";
}

namespace {

double metric_value(ImportanceMetric metric, const std::vector<int>& y_true,
                    const std::vector<int>& y_pred) {
    const MetricSet m = classification_metrics(confusion(y_true, y_pred));
    switch (metric) {
        case ImportanceMetric::recall: return m.recall;
        case ImportanceMetric::mcc: return m.mcc;
        case ImportanceMetric::accuracy: return m.accuracy;
        case ImportanceMetric::f1: return m.f1;
    }
    return 0.0;
}

}  // namespace

ImportanceReport permutation_importance(const ModelArtifact& model, const Dataset& ds,
                                        ImportanceMetric metric, int repeats,
                                        std::uint64_t seed) {
    if (repeats < 1) throw ValueError("permutation_importance: repeats must be >= 1");
    const std::size_t d = ds.n_cols(), n = ds.n_rows();

    ImportanceReport report;
    report.metric = metric;
    report.repeats = repeats;
    report.seed = seed;
    report.baseline = metric_value(metric, ds.labels, predict_labels(model, ds.features));

    const auto r_count = static_cast<std::size_t>(repeats);
    std::vector<double> drops(d * r_count);
    parallel_for(d * r_count, [&](std::size_t cell) {
        const std::size_t c = cell / r_count;
        Rng rng(derive_seed(seed, cell));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);

        Matrix shuffled = ds.features;
        for (std::size_t r = 0; r < n; ++r) shuffled(r, c) = ds.features(perm[r], c);
        const double v = metric_value(metric, ds.labels, predict_labels(model, shuffled));
        drops[cell] = report.baseline - v;
    });

    report.mean_drop.assign(d, 0.0);
    report.std_dev.assign(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < r_count; ++r) mean += drops[c * r_count + r];
        mean /= static_cast<double>(r_count);
        report.mean_drop[c] = mean;
        if (r_count > 1) {
            double ss = 0.0;
            for (std::size_t r = 0; r < r_count; ++r) {
                const double dv = drops[c * r_count + r] - mean;
                ss += dv * dv;
            }
            report.std_dev[c] = std::sqrt(ss / static_cast<double>(r_count - 1));
        }
    }
    return report;
}

std::string ImportanceReport::to_csv(const std::vector<std::string>& feature_names) const {
    std::ostringstream out;
    out.precision(17);
    out << "feature,mean_drop,std_dev\n";
    for (std::size_t c = 0; c < mean_drop.size(); ++c)
        out << (c < feature_names.size() ? feature_names[c] : "f" + std::to_string(c)) << ','
            << mean_drop[c] << ',' << std_dev[c] << '\n';
    return out.str();
}

LocalExplanation local_surrogate(const ModelArtifact& model, std::span<const double> x,
                                 const Dataset& background, int n_perturbations,
                                 double kernel_width, std::uint64_t seed) {
    const std::size_t d = x.size();
    if (background.n_cols() != d)
        throw ValueError("local_surrogate: background dimension mismatch");
    if (n_perturbations < static_cast<int>(d) + 2)
        throw ValueError("local_surrogate: need more perturbations than features");

    LocalExplanation ex;
    ex.reference.assign(x.begin(), x.end());
    ex.n_perturbations = n_perturbations;
    ex.kernel_width =
        kernel_width > 0.0 ? kernel_width : 0.75 * std::sqrt(static_cast<double>(d));

    // Per-feature scale for the distance; binary columns count 0/1 flips.
    std::vector<double> scale(d, 1.0);
    for (std::size_t c = 0; c < d; ++c) {
        if (background.feature_kinds[c] == FeatureKind::binary) continue;
        double mean = 0.0, ss = 0.0;
        const std::size_t n = background.n_rows();
        for (std::size_t r = 0; r < n; ++r) mean += background.features(r, c);
        mean /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) {
            const double dv = background.features(r, c) - mean;
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        scale[c] = sd > 0.0 ? sd : 1.0;
    }

    const auto n_samples = static_cast<std::size_t>(n_perturbations);
    Matrix z(n_samples, d);
    std::vector<double> weight(n_samples), target(n_samples);

    parallel_for(n_samples, [&](std::size_t s) {
        Rng rng(derive_seed(seed, s));
        double dist2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            double v = x[c];
            if (rng.uniform() < 0.5) {
                if (background.feature_kinds[c] == FeatureKind::binary)
                    v = x[c] == 0.0 ? 1.0 : 0.0;
                else
                    v = background.features(rng.below(background.n_rows()), c);
            }
            z(s, c) = v;
            const double diff = (v - x[c]) / scale[c];
            dist2 += diff * diff;
        }
        weight[s] = std::exp(-dist2 / (ex.kernel_width * ex.kernel_width));
        target[s] = model.predict_row(z.row_ptr(s))[1];
    });

    // Weighted least squares on [1, z] with automatic ridge fallback.
    Eigen::MatrixXd design(n_samples, d + 1);
    Eigen::VectorXd wy(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        design(s, 0) = 1.0;
        for (std::size_t c = 0; c < d; ++c) design(s, c + 1) = z(s, c);
    }
    Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(weight.data(), static_cast<long>(n_samples));
    Eigen::VectorXd t = Eigen::Map<Eigen::VectorXd>(target.data(), static_cast<long>(n_samples));
    Eigen::MatrixXd xtw = design.transpose() * w.asDiagonal();
    Eigen::MatrixXd gram = xtw * design;
    Eigen::VectorXd rhs = xtw * t;

    Eigen::VectorXd coef = Eigen::VectorXd::Zero(static_cast<long>(d) + 1);
    bool solved = false;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() == Eigen::Success) {
        coef = ldlt.solve(rhs);
        solved = coef.allFinite() &&
                 (gram * coef - rhs).norm() <= 1e-6 * (1.0 + rhs.norm());
    }
    if (!solved) {  // singular design: damp with a small ridge
        gram.diagonal().array() += 1e-6;
        coef = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(rhs);
        ex.ridged = true;
    }

    ex.intercept = coef(0);
    ex.coefficients.resize(d);
    for (std::size_t c = 0; c < d; ++c) ex.coefficients[c] = coef(static_cast<long>(c) + 1);

    // Weighted R^2 of the surrogate on its own sample.
    const double w_total = w.sum();
    const double t_mean = w.dot(t) / w_total;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        double pred = ex.intercept;
        for (std::size_t c = 0; c < d; ++c) pred += ex.coefficients[c] * z(s, c);
        ss_res += weight[s] * (target[s] - pred) * (target[s] - pred);
        ss_tot += weight[s] * (target[s] - t_mean) * (target[s] - t_mean);
    }
    // A (numerically) constant model over the sample has no variance to
    // explain; flag fidelity undefined rather than dividing by noise.
    if (ss_tot > 1e-12 * w_total * (1.0 + t_mean * t_mean)) {
        ex.fidelity_r2 = 1.0 - ss_res / ss_tot;
    } else {
        ex.fidelity_defined = false;
        ex.fidelity_r2 = 0.0;
    }
    return ex;
}

namespace {

double coalition_value(const ModelArtifact& model, std::span<const double> x,
                       const Dataset& background, std::uint32_t mask,
                       std::vector<double>& scratch) {
    const std::size_t d = x.size();
    double acc = 0.0;
    for (std::size_t b = 0; b < background.n_rows(); ++b) {
        for (std::size_t c = 0; c < d; ++c)
            scratch[c] = (mask >> c) & 1u ? x[c] : background.features(b, c);
        acc += model.predict_row(scratch.data())[1];
    }
    return acc / static_cast<double>(background.n_rows());
}

}  // namespace

double Attribution::efficiency_residual() const {
    double total = 0.0;
    for (double p : phi) total += p;
    return std::abs(total - (prediction - baseline));
}

Attribution shapley_exact(const ModelArtifact& model, std::span<const double> x,
                          const Dataset& background) {
    const std::size_t d = x.size();
    if (d > 12) throw ValueError("shapley_exact: enumeration guard allows at most 12 features");
    if (background.n_rows() == 0) throw ValueError("shapley_exact: empty background");
    if (background.n_cols() != d) throw ValueError("shapley_exact: dimension mismatch");

    Attribution a;
    a.method = AttributionMethod::exact;
    a.phi.assign(d, 0.0);

    const std::uint32_t n_masks = 1u << d;
    std::vector<double> value(n_masks);
    parallel_for(n_masks, [&](std::size_t mask) {
        std::vector<double> scratch(d);
        value[mask] = coalition_value(model, x, background,
                                      static_cast<std::uint32_t>(mask), scratch);
    });
    a.baseline = value[0];
    a.prediction = value[n_masks - 1];

    // Exact factorial weights; 12! still fits a double exactly.
    std::vector<double> fact(d + 1, 1.0);
    for (std::size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
    const double d_fact = fact[d];

    for (std::size_t j = 0; j < d; ++j) {
        const std::uint32_t bit = 1u << j;
        double phi = 0.0;
        for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            const double w = fact[s] * fact[d - s - 1] / d_fact;
            phi += w * (value[mask | bit] - value[mask]);
        }
        a.phi[j] = phi;
    }
    return a;
}

Attribution shapley_sampled(const ModelArtifact& model, std::span<const double> x,
                            const Dataset& background, int n_samples, std::uint64_t seed) {
    const std::size_t d = x.size();
    if (n_samples < 1) throw ValueError("shapley_sampled: n_samples must be >= 1");
    if (background.n_rows() == 0) throw ValueError("shapley_sampled: empty background");
    if (background.n_cols() != d) throw ValueError("shapley_sampled: dimension mismatch");

    Attribution a;
    a.method = AttributionMethod::sampled;
    a.n_samples = n_samples;
    a.seed = seed;
    a.phi.assign(d, 0.0);
    a.std_error.assign(d, 0.0);

    // True baseline over the whole background; per-sample walks use one
    // sampled background row, so the efficiency residual shrinks as the
    // sample count grows.
    {
        std::vector<double> scratch(d);
        a.baseline = coalition_value(model, x, background, 0, scratch);
        a.prediction = model.predict_row(x.data())[1];
    }

    const auto n = static_cast<std::size_t>(n_samples);
    std::vector<double> contrib(n * d);
    parallel_for(n, [&](std::size_t s) {
        Rng rng(derive_seed(seed, s));
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        const std::size_t b = static_cast<std::size_t>(rng.below(background.n_rows()));

        std::vector<double> point(d);
        for (std::size_t c = 0; c < d; ++c) point[c] = background.features(b, c);
        double prev = model.predict_row(point.data())[1];
        for (auto j : order) {
            point[j] = x[j];
            const double cur = model.predict_row(point.data())[1];
            contrib[s * d + j] = cur - prev;
            prev = cur;
        }
    });

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

std::string attribution_to_csv(const Attribution& a,
                               const std::vector<std::string>& feature_names) {
    std::ostringstream out;
    out.precision(17);
    out << "feature,phi,std_error\n";
    for (std::size_t c = 0; c < a.phi.size(); ++c)
        out << (c < feature_names.size() ? feature_names[c] : "f" + std::to_string(c)) << ','
            << a.phi[c] << ',' << (c < a.std_error.size() ? a.std_error[c] : 0.0) << '\n';
    return out.str();
}

}  // namespace automal
