#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "automal/matrix.hpp"

namespace automal {

// Principal components of the sample covariance (divisor n-1). Component
// rows are orthonormal, ordered by descending eigenvalue, with a
// deterministic sign: each component's largest-magnitude entry is positive.
struct PcaModel {
    std::vector<double> mean;
    Matrix components;                     // n_components x n_features
    std::vector<double> eigenvalues;       // descending, clipped at 0
    std::vector<double> variance_ratios;   // eigenvalue / total variance
    std::size_t n_components = 0;

    Matrix transform(const Matrix& x) const;           // (x - mean) * components^T
    Matrix reconstruct(const Matrix& scores) const;    // scores * components + mean
};

PcaModel fit_pca(const Matrix& x, std::size_t n_components);
inline Matrix transform_pca(const PcaModel& m, const Matrix& x) { return m.transform(x); }

// Two-group ANOVA F statistic per feature: between-group mean square over
// within-group mean square. Zero within-variance with nonzero separation
// yields +infinity; a feature that is constant overall scores 0.
std::vector<double> anova_f_scores(const Matrix& x, const std::vector<int>& y);

enum class MaskSource { anova, lasso, manual };

struct FeatureMask {
    std::vector<char> keep;  // one flag per original column
    MaskSource source = MaskSource::manual;

    std::size_t count() const;
    std::vector<std::size_t> kept_indices() const;
};

// Keeps the k highest scores, ties resolved toward the lower column index.
FeatureMask select_k_best(const std::vector<double>& scores, std::size_t k);

// L1-regularized least squares fitted by cyclic coordinate descent on
// internally standardized features:
//   minimize (1/2n) * ||y_c - X_s b||^2 + lambda * ||b||_1
// where X_s has zero mean and unit scale per column (constant columns get
// zero scale and a pinned zero coefficient) and y_c is centered. beta lives
// in standardized coordinates; original-scale coefficients are derived.
struct LassoModel {
    std::vector<double> beta;          // standardized coordinates
    double intercept = 0.0;            // mean of y
    double lambda = 0.0;
    std::vector<double> feature_mean;
    std::vector<double> feature_scale;  // 0 marks a constant column
    std::size_t iterations = 0;         // full coordinate sweeps
    bool converged = false;
    std::vector<double> objective_trace;  // objective after each sweep

    double predict(std::span<const double> x) const;
    std::vector<double> original_coefficients() const;
    double original_intercept() const;

    // Max KKT violation at the solution: |g_j + lambda*sign(b_j)| on the
    // active set, max(0, |g_j| - lambda) off it, with g the gradient of the
    // smooth half-MSE term.
    double kkt_residual(const Matrix& x, const std::vector<double>& y) const;
};

LassoModel fit_lasso(const Matrix& x, const std::vector<double>& y, double lambda,
                     double tol = 1e-6, std::size_t max_iter = 10000);

// Smallest lambda that zeroes every coefficient: max_j |x_j^T y_c| / n in
// standardized coordinates.
double lasso_lambda_max(const Matrix& x, const std::vector<double>& y);

// Keeps columns with |beta_j| > abs_threshold; if that empties the mask,
// falls back to the single largest-|beta| column (lowest index on ties).
FeatureMask lasso_select(const LassoModel& model, double abs_threshold = 0.0);

}  // namespace automal
