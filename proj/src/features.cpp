#include "automal/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace automal {

namespace {

void require_finite(const Matrix& x, const char* who) {
    for (double v : x.data())
        if (!std::isfinite(v)) throw ValueError(std::string(who) + ": non-finite value in input");
}

}  // namespace

PcaModel fit_pca(const Matrix& x, std::size_t n_components) {
    const std::size_t n = x.rows(), d = x.cols();
    if (n < 2) throw ValueError("fit_pca: need at least 2 rows");
    if (n_components == 0 || n_components > std::min(n - 1, d))
        throw ValueError("fit_pca: n_components must lie in [1, min(rows-1, cols)]");
    require_finite(x, "fit_pca");

    PcaModel model;
    model.n_components = n_components;
    model.mean.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) model.mean[c] += x(r, c);
    for (auto& m : model.mean) m /= static_cast<double>(n);

    Eigen::MatrixXd centered(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) centered(r, c) = x(r, c) - model.mean[c];

    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    const double total_variance = cov.trace();
    if (!(total_variance > 0.0))
        throw ValueError("fit_pca: input has zero variance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw Error("fit_pca: eigendecomposition failed");

    // Eigen returns ascending eigenvalues; take the top ones in reverse.
    model.components = Matrix(n_components, d);
    model.eigenvalues.resize(n_components);
    model.variance_ratios.resize(n_components);
    for (std::size_t k = 0; k < n_components; ++k) {
        const auto src = static_cast<Eigen::Index>(d - 1 - k);
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        // Deterministic sign: make the largest-magnitude entry positive.
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        for (std::size_t c = 0; c < d; ++c) model.components(k, c) = v(static_cast<Eigen::Index>(c));
        model.eigenvalues[k] = std::max(0.0, solver.eigenvalues()(src));
        model.variance_ratios[k] = model.eigenvalues[k] / total_variance;
    }
    return model;
}

Matrix PcaModel::transform(const Matrix& x) const {
    if (x.cols() != mean.size())
        throw ValueError("PcaModel::transform: dimension mismatch");
    Matrix out(x.rows(), n_components);
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t k = 0; k < n_components; ++k) {
            double acc = 0.0;
            for (std::size_t c = 0; c < mean.size(); ++c)
                acc += (x(r, c) - mean[c]) * components(k, c);
            out(r, k) = acc;
        }
    return out;
}

Matrix PcaModel::reconstruct(const Matrix& scores) const {
    if (scores.cols() != n_components)
        throw ValueError("PcaModel::reconstruct: dimension mismatch");
    Matrix out(scores.rows(), mean.size());
    for (std::size_t r = 0; r < scores.rows(); ++r)
        for (std::size_t c = 0; c < mean.size(); ++c) {
            double acc = mean[c];
            for (std::size_t k = 0; k < n_components; ++k)
                acc += scores(r, k) * components(k, c);
            out(r, c) = acc;
        }
    return out;
}

std::vector<double> anova_f_scores(const Matrix& x, const std::vector<int>& y) {
    const std::size_t n = x.rows(), d = x.cols();
    if (y.size() != n) throw ValueError("anova_f_scores: label length mismatch");
    std::size_t n0 = 0, n1 = 0;
    for (int v : y) (v == 1 ? n1 : n0)++;
    if (n0 == 0 || n1 == 0)
        throw ValueError("anova_f_scores: both classes must be present");

    std::vector<double> scores(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double sum0 = 0.0, sum1 = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            (y[r] == 1 ? sum1 : sum0) += x(r, c);
        const double mean0 = sum0 / static_cast<double>(n0);
        const double mean1 = sum1 / static_cast<double>(n1);
        const double grand = (sum0 + sum1) / static_cast<double>(n);

        double ssw = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dev = x(r, c) - (y[r] == 1 ? mean1 : mean0);
            ssw += dev * dev;
        }
        const double ssb = static_cast<double>(n0) * (mean0 - grand) * (mean0 - grand) +
                           static_cast<double>(n1) * (mean1 - grand) * (mean1 - grand);
        const double msb = ssb;  // df = k - 1 = 1
        const double msw = ssw / static_cast<double>(n - 2);
        if (msw > 0.0)
            scores[c] = msb / msw;
        else
            scores[c] = msb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return scores;
}

std::size_t FeatureMask::count() const {
    return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), char(1)));
}

std::vector<std::size_t> FeatureMask::kept_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < keep.size(); ++i)
        if (keep[i]) out.push_back(i);
    return out;
}

FeatureMask select_k_best(const std::vector<double>& scores, std::size_t k) {
    if (k == 0 || k > scores.size())
        throw ValueError("select_k_best: k out of range");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    FeatureMask mask;
    mask.source = MaskSource::anova;
    mask.keep.assign(scores.size(), 0);
    for (std::size_t i = 0; i < k; ++i) mask.keep[order[i]] = 1;
    return mask;
}

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

}  // namespace

LassoModel fit_lasso(const Matrix& x, const std::vector<double>& y, double lambda,
                     double tol, std::size_t max_iter) {
    const std::size_t n = x.rows(), d = x.cols();
    if (y.size() != n) throw ValueError("fit_lasso: label length mismatch");
    if (n == 0 || d == 0) throw ValueError("fit_lasso: empty input");
    if (lambda < 0.0) throw ValueError("fit_lasso: lambda must be non-negative");
    require_finite(x, "fit_lasso");
    for (double v : y)
        if (!std::isfinite(v)) throw ValueError("fit_lasso: non-finite target");

    LassoModel model;
    model.lambda = lambda;
    model.feature_mean.assign(d, 0.0);
    model.feature_scale.assign(d, 0.0);

    for (std::size_t c = 0; c < d; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += x(r, c);
        model.feature_mean[c] = s / static_cast<double>(n);
    }
    for (std::size_t c = 0; c < d; ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dv = x(r, c) - model.feature_mean[c];
            ss += dv * dv;
        }
        model.feature_scale[c] = std::sqrt(ss / static_cast<double>(n));
    }

    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= static_cast<double>(n);
    model.intercept = y_mean;

    // Standardized copy, column-major for the sweep.
    std::vector<std::vector<double>> xs(d);
    for (std::size_t c = 0; c < d; ++c) {
        xs[c].resize(n);
        if (model.feature_scale[c] == 0.0) continue;  // constant column stays zero
        for (std::size_t r = 0; r < n; ++r)
            xs[c][r] = (x(r, c) - model.feature_mean[c]) / model.feature_scale[c];
    }

    model.beta.assign(d, 0.0);
    std::vector<double> residual(n);
    for (std::size_t r = 0; r < n; ++r) residual[r] = y[r] - y_mean;

    const double inv_n = 1.0 / static_cast<double>(n);
    auto objective = [&]() {
        double sse = 0.0;
        for (double r : residual) sse += r * r;
        double l1 = 0.0;
        for (double b : model.beta) l1 += std::abs(b);
        return 0.5 * inv_n * sse + lambda * l1;
    };

    for (std::size_t sweep = 0; sweep < max_iter; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            if (model.feature_scale[c] == 0.0) continue;
            const double old = model.beta[c];
            // rho = (1/n) x_c . (residual + x_c * old); unit variance makes
            // the update a plain soft threshold.
            double rho = 0.0;
            const double* col = xs[c].data();
            for (std::size_t r = 0; r < n; ++r) rho += col[r] * residual[r];
            rho = rho * inv_n + old;
            const double next = soft_threshold(rho, lambda);
            if (next != old) {
                const double delta = next - old;
                for (std::size_t r = 0; r < n; ++r) residual[r] -= delta * col[r];
                model.beta[c] = next;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        model.objective_trace.push_back(objective());
        model.iterations = sweep + 1;
        if (max_delta < tol) {
            model.converged = true;
            break;
        }
    }
    return model;
}

double lasso_lambda_max(const Matrix& x, const std::vector<double>& y) {
    const std::size_t n = x.rows(), d = x.cols();
    if (y.size() != n || n == 0) throw ValueError("lasso_lambda_max: bad input");
    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= static_cast<double>(n);

    double best = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        double mean = 0.0, ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += x(r, c);
        mean /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) {
            const double dv = x(r, c) - mean;
            ss += dv * dv;
        }
        const double scale = std::sqrt(ss / static_cast<double>(n));
        if (scale == 0.0) continue;
        double dot = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            dot += (x(r, c) - mean) / scale * (y[r] - y_mean);
        best = std::max(best, std::abs(dot) / static_cast<double>(n));
    }
    return best;
}

double LassoModel::predict(std::span<const double> x) const {
    if (x.size() != beta.size()) throw ValueError("LassoModel::predict: dimension mismatch");
    double acc = intercept;
    for (std::size_t c = 0; c < beta.size(); ++c) {
        if (feature_scale[c] == 0.0) continue;
        acc += beta[c] * (x[c] - feature_mean[c]) / feature_scale[c];
    }
    return acc;
}

std::vector<double> LassoModel::original_coefficients() const {
    std::vector<double> out(beta.size(), 0.0);
    for (std::size_t c = 0; c < beta.size(); ++c)
        if (feature_scale[c] != 0.0) out[c] = beta[c] / feature_scale[c];
    return out;
}

double LassoModel::original_intercept() const {
    double acc = intercept;
    for (std::size_t c = 0; c < beta.size(); ++c)
        if (feature_scale[c] != 0.0) acc -= beta[c] * feature_mean[c] / feature_scale[c];
    return acc;
}

double LassoModel::kkt_residual(const Matrix& x, const std::vector<double>& y) const {
    const std::size_t n = x.rows(), d = x.cols();
    if (d != beta.size() || y.size() != n)
        throw ValueError("kkt_residual: dimension mismatch");

    // Reconstruct the standardized residual.
    std::vector<double> residual(n);
    for (std::size_t r = 0; r < n; ++r) {
        double pred = intercept;
        for (std::size_t c = 0; c < d; ++c)
            if (feature_scale[c] != 0.0)
                pred += beta[c] * (x(r, c) - feature_mean[c]) / feature_scale[c];
        residual[r] = y[r] - pred;
    }

    double worst = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < d; ++c) {
        if (feature_scale[c] == 0.0) continue;
        double grad = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            grad -= (x(r, c) - feature_mean[c]) / feature_scale[c] * residual[r];
        grad *= inv_n;
        double violation;
        if (beta[c] != 0.0)
            violation = std::abs(grad + lambda * (beta[c] > 0 ? 1.0 : -1.0));
        else
            violation = std::max(0.0, std::abs(grad) - lambda);
        worst = std::max(worst, violation);
    }
    return worst;
}

FeatureMask lasso_select(const LassoModel& model, double abs_threshold) {
    FeatureMask mask;
    mask.source = MaskSource::lasso;
    mask.keep.assign(model.beta.size(), 0);
    bool any = false;
    for (std::size_t c = 0; c < model.beta.size(); ++c) {
        if (std::abs(model.beta[c]) > abs_threshold) {
            mask.keep[c] = 1;
            any = true;
        }
    }
    if (!any) {
        // Fall back to the single largest-|beta| column, lowest index on ties.
        std::size_t best = 0;
        double best_val = -1.0;
        for (std::size_t c = 0; c < model.beta.size(); ++c)
            if (std::abs(model.beta[c]) > best_val) {
                best_val = std::abs(model.beta[c]);
                best = c;
            }
        mask.keep[best] = 1;
    }
    return mask;
}

}  // namespace automal
