#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "automal/features.hpp"
#include "automal/rng.hpp"
#include "helpers.hpp"

using namespace automal;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -2.0,
                     double hi = 2.0) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("fit_pca: diagonal three-point fixture") {
    // points (1,1),(2,2),(3,3): covariance [[1,1],[1,1]], leading
    // eigenvector (1,1)/sqrt(2) with eigenvalue 2, second eigenvalue 0.
    Matrix x(3, 2);
    x(0, 0) = 1; x(0, 1) = 1;
    x(1, 0) = 2; x(1, 1) = 2;
    x(2, 0) = 3; x(2, 1) = 3;
    const PcaModel model = fit_pca(x, 2);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(model.components(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-9));
    CHECK(model.components(0, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-9));
    CHECK(model.variance_ratios[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(model.variance_ratios[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fit_pca: axis-aligned data recovers the axes") {
    Rng rng(4);
    Matrix x(60, 2);
    for (std::size_t r = 0; r < 60; ++r) {
        x(r, 0) = rng.uniform(-10.0, 10.0);  // dominant variance
        x(r, 1) = rng.uniform(-0.1, 0.1);
    }
    const PcaModel model = fit_pca(x, 2);
    CHECK(std::abs(model.components(0, 0)) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(model.components(1, 1)) == doctest::Approx(1.0).epsilon(1e-3));
    // sign convention: the largest-magnitude entry is positive
    CHECK(model.components(0, 0) > 0.0);
    CHECK(model.components(1, 1) > 0.0);
}

TEST_CASE("fit_pca: orthonormal components and full-rank reconstruction") {
    Rng rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t rows = 30 + rng.below(80);
        const std::size_t cols = 3 + rng.below(12);
        const Matrix x = random_matrix(rows, cols, rng);
        const std::size_t k = std::min(rows - 1, cols);
        const PcaModel model = fit_pca(x, k);

        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b <= a; ++b) {
                double dot = 0.0;
                for (std::size_t c = 0; c < cols; ++c)
                    dot += model.components(a, c) * model.components(b, c);
                CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-8));
            }

        for (std::size_t i = 1; i < k; ++i)
            CHECK(model.eigenvalues[i - 1] >= model.eigenvalues[i] - 1e-12);

        double ratio_sum = 0.0;
        for (double r : model.variance_ratios) ratio_sum += r;
        CHECK(ratio_sum <= 1.0 + 1e-8);

        if (k == cols) {
            const Matrix recon = model.reconstruct(model.transform(x));
            double err = 0.0, norm = 0.0;
            for (std::size_t i = 0; i < x.data().size(); ++i) {
                err += (recon.data()[i] - x.data()[i]) * (recon.data()[i] - x.data()[i]);
                norm += x.data()[i] * x.data()[i];
            }
            CHECK(std::sqrt(err / norm) < 1e-8);
        }
    }
}

TEST_CASE("transform_pca: mean row maps to zero, diagonal scores") {
    Matrix x(3, 2);
    x(0, 0) = 1; x(0, 1) = 1;
    x(1, 0) = 2; x(1, 1) = 2;
    x(2, 0) = 3; x(2, 1) = 3;
    const PcaModel model = fit_pca(x, 1);

    Matrix mean_row(1, 2);
    mean_row(0, 0) = 2;
    mean_row(0, 1) = 2;
    CHECK(model.transform(mean_row)(0, 0) == doctest::Approx(0.0).epsilon(1e-12));

    Matrix pair(2, 2);
    pair(0, 0) = 1; pair(0, 1) = 1;
    pair(1, 0) = 3; pair(1, 1) = 3;
    const Matrix scores = model.transform(pair);
    CHECK(scores(0, 0) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-9));
    CHECK(scores(1, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("transform_pca: per-component score variance equals the eigenvalue") {
    Rng rng(12);
    const Matrix x = random_matrix(50, 6, rng);
    const PcaModel model = fit_pca(x, 6);
    const Matrix scores = model.transform(x);
    for (std::size_t k = 0; k < 6; ++k) {
        double mean = 0.0;
        for (std::size_t r = 0; r < 50; ++r) mean += scores(r, k);
        mean /= 50.0;
        double var = 0.0;
        for (std::size_t r = 0; r < 50; ++r)
            var += (scores(r, k) - mean) * (scores(r, k) - mean);
        var /= 49.0;
        CHECK(var == doctest::Approx(model.eigenvalues[k]).epsilon(1e-8));
    }
}

TEST_CASE("fit_pca: error paths") {
    Matrix constant(5, 3, 7.0);
    CHECK_THROWS_AS(fit_pca(constant, 2), ValueError);
    Rng rng(1);
    const Matrix x = random_matrix(5, 3, rng);
    CHECK_THROWS_AS(fit_pca(x, 4), ValueError);
    CHECK_THROWS_AS(fit_pca(x, 0), ValueError);
    CHECK_THROWS_AS(fit_pca(x, 5), ValueError);  // > rows-1

    Matrix mismatched(2, 4);
    const PcaModel model = fit_pca(x, 2);
    CHECK_THROWS_AS(model.transform(mismatched), ValueError);
}

TEST_CASE("anova_f_scores: hand-computed two-group F") {
    // class0 = [1,2,3], class1 = [4,5,6]: SSB = 13.5 (df 1), SSW = 4 (df 4),
    // so F = 13.5 / 1 = 13.5.
    Matrix x(6, 1);
    for (int i = 0; i < 6; ++i) x(static_cast<std::size_t>(i), 0) = i + 1;
    const std::vector<int> y = {0, 0, 0, 1, 1, 1};
    const auto scores = anova_f_scores(x, y);
    CHECK(scores[0] == doctest::Approx(13.5).epsilon(1e-12));
}

TEST_CASE("anova_f_scores: degenerate cases") {
    Matrix x(4, 2);
    // column 0 identical across classes; column 1 constant within each
    // class but different between them
    x(0, 0) = 5; x(1, 0) = 5; x(2, 0) = 5; x(3, 0) = 5;
    x(0, 1) = 1; x(1, 1) = 1; x(2, 1) = 2; x(3, 1) = 2;
    const std::vector<int> y = {0, 0, 1, 1};
    const auto scores = anova_f_scores(x, y);
    CHECK(scores[0] == 0.0);
    CHECK(std::isinf(scores[1]));
    CHECK(scores[1] > 0.0);

    CHECK_THROWS_AS(anova_f_scores(x, std::vector<int>{0, 0, 0, 0}), ValueError);
}

TEST_CASE("anova_f_scores: invariant under positive affine transforms") {
    Rng rng(19);
    Matrix x(40, 3);
    std::vector<int> y(40);
    for (std::size_t r = 0; r < 40; ++r) {
        y[r] = static_cast<int>(rng.below(2));
        for (std::size_t c = 0; c < 3; ++c)
            x(r, c) = rng.uniform(-1.0, 1.0) + (y[r] == 1 ? 0.5 : 0.0);
    }
    const auto base = anova_f_scores(x, y);
    Matrix transformed = x;
    const double a = 3.7, b = -11.0;
    for (auto& v : transformed.data()) v = a * v + b;
    const auto after = anova_f_scores(transformed, y);
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(after[c] == doctest::Approx(base[c]).epsilon(1e-9));
}

TEST_CASE("select_k_best: ranking and tie-breaks") {
    const FeatureMask top1 = select_k_best({0.1, 13.5, 2.0}, 1);
    CHECK(top1.kept_indices() == std::vector<std::size_t>{1});

    const FeatureMask all = select_k_best({0.1, 13.5, 2.0}, 3);
    CHECK(all.count() == 3);

    const FeatureMask tied = select_k_best({5.0, 5.0}, 1);
    CHECK(tied.kept_indices() == std::vector<std::size_t>{0});

    CHECK_THROWS_AS(select_k_best({1.0, 2.0}, 0), ValueError);
    CHECK_THROWS_AS(select_k_best({1.0, 2.0}, 3), ValueError);
}

TEST_CASE("fit_lasso: single-feature soft threshold") {
    // x = [-1, 1] standardizes to itself; y = [-0.8, 0.8] gives
    // x^T y / n = 0.8, so beta = S(0.8, 0.3) = 0.5.
    Matrix x(2, 1);
    x(0, 0) = -1;
    x(1, 0) = 1;
    const std::vector<double> y = {-0.8, 0.8};
    const LassoModel model = fit_lasso(x, y, 0.3);
    CHECK(model.beta[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(model.converged);
}

TEST_CASE("fit_lasso: lambda zero matches the normal equations") {
    Rng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 50, d = 10;
        const Matrix x = random_matrix(n, d, rng);
        std::vector<double> y(n);
        for (std::size_t r = 0; r < n; ++r)
            y[r] = rng.uniform(-1.0, 1.0) + 0.7 * x(r, 0) - 0.4 * x(r, 3);

        const LassoModel model = fit_lasso(x, y, 0.0, 1e-10, 50000);

        // oracle: solve the standardized least squares directly
        Eigen::MatrixXd xs(n, d);
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t r = 0; r < n; ++r)
                xs(r, c) = (x(r, c) - model.feature_mean[c]) / model.feature_scale[c];
        Eigen::VectorXd yc(n);
        double y_mean = 0.0;
        for (double v : y) y_mean += v;
        y_mean /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) yc(r) = y[r] - y_mean;
        Eigen::VectorXd direct = (xs.transpose() * xs).ldlt().solve(xs.transpose() * yc);

        for (std::size_t c = 0; c < d; ++c)
            CHECK(model.beta[c] == doctest::Approx(direct(static_cast<long>(c))).epsilon(1e-6));
    }
}

TEST_CASE("fit_lasso: lambda at or above lambda_max kills every coefficient") {
    Rng rng(55);
    const Matrix x = random_matrix(30, 5, rng);
    std::vector<double> y(30);
    for (std::size_t r = 0; r < 30; ++r) y[r] = x(r, 1) + rng.uniform(-0.1, 0.1);

    const double lmax = lasso_lambda_max(x, y);
    const LassoModel model = fit_lasso(x, y, lmax);
    for (double b : model.beta) CHECK(b == 0.0);
}

TEST_CASE("fit_lasso: KKT residual within tolerance across lambdas") {
    Rng rng(77);
    const Matrix x = random_matrix(60, 8, rng);
    std::vector<double> y(60);
    for (std::size_t r = 0; r < 60; ++r)
        y[r] = 0.5 * x(r, 2) - 0.25 * x(r, 5) + rng.uniform(-0.2, 0.2);
    for (double lambda : {0.0, 0.01, 0.05, 0.2}) {
        const LassoModel model = fit_lasso(x, y, lambda, 1e-8, 50000);
        CHECK(model.kkt_residual(x, y) <= 1e-5);
    }
}

TEST_CASE("fit_lasso: objective non-increasing across sweeps") {
    Rng rng(88);
    const Matrix x = random_matrix(50, 12, rng);
    std::vector<double> y(50);
    for (std::size_t r = 0; r < 50; ++r) y[r] = x(r, 0) - x(r, 1) + rng.uniform(-0.3, 0.3);
    const LassoModel model = fit_lasso(x, y, 0.02);
    REQUIRE(model.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < model.objective_trace.size(); ++i)
        CHECK(model.objective_trace[i] <= model.objective_trace[i - 1] + 1e-12);
}

TEST_CASE("fit_lasso: hitting max_iter reports non-convergence") {
    Rng rng(99);
    const Matrix x = random_matrix(40, 10, rng);
    std::vector<double> y(40);
    for (std::size_t r = 0; r < 40; ++r) y[r] = rng.uniform(-1.0, 1.0);
    const LassoModel model = fit_lasso(x, y, 1e-6, 1e-15, 2);
    CHECK(!model.converged);
    CHECK(model.iterations == 2);
}

TEST_CASE("fit_lasso: constant columns pin to zero, non-finite rejected") {
    Matrix x(4, 2);
    x(0, 0) = 1; x(1, 0) = 2; x(2, 0) = 3; x(3, 0) = 4;
    for (std::size_t r = 0; r < 4; ++r) x(r, 1) = 5.0;
    const std::vector<double> y = {1, 2, 3, 4};
    const LassoModel model = fit_lasso(x, y, 0.01);
    CHECK(model.beta[1] == 0.0);
    CHECK(model.feature_scale[1] == 0.0);

    Matrix bad = x;
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_lasso(bad, y, 0.01), ValueError);
}

TEST_CASE("lasso_select: support, fallback, and OLS cross-check") {
    LassoModel model;
    model.beta = {0.0, 0.5, -0.2};
    CHECK(lasso_select(model, 0.0).kept_indices() == std::vector<std::size_t>{1, 2});

    model.beta = {0.0, 0.0, 0.0};
    const FeatureMask fallback = lasso_select(model, 0.0);
    CHECK(fallback.kept_indices() == std::vector<std::size_t>{0});

    Rng rng(121);
    const Matrix x = random_matrix(50, 6, rng);
    std::vector<double> y(50);
    for (std::size_t r = 0; r < 50; ++r) y[r] = x(r, 0) + rng.uniform(-0.1, 0.1);
    const LassoModel ols = fit_lasso(x, y, 0.0, 1e-10, 50000);
    FeatureMask mask = lasso_select(ols, 0.0);
    std::vector<std::size_t> brute;
    for (std::size_t c = 0; c < 6; ++c)
        if (std::abs(ols.beta[c]) > 0.0) brute.push_back(c);
    CHECK(mask.kept_indices() == brute);
}
