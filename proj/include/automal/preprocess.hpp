#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "automal/dataset.hpp"

namespace automal {

struct PreprocessConfig {
    bool drop_duplicates = true;
    bool remove_outliers = false;  // Tukey IQR fences on numeric columns
    double iqr_k = 1.5;
    bool encode_onehot = false;
    bool operator==(const PreprocessConfig&) const = default;
};

struct ColumnRule {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    bool drop = false;      // all-missing at fit time
    double impute = 0.0;    // median (numeric) or mode (binary/categorical)
    bool fence = false;     // numeric, non-binary columns only
    double fence_lo = 0.0;
    double fence_hi = 0.0;
    bool operator==(const ColumnRule&) const = default;
};

struct OneHotRule {
    std::size_t source_col = 0;   // index into the fitted column order
    std::string source_name;
    std::vector<double> codes;    // level codes present at fit time, ascending
    std::vector<std::string> names;  // derived column names, plus the other column
    bool operator==(const OneHotRule&) const = default;
};

// Fitted, replayable cleaning decisions. Computed from training data only
// and immutable afterwards; equality is field-exact so leakage tests can
// compare plans bitwise.
struct PreprocessPlan {
    std::vector<ColumnRule> columns;  // aligned with the fitted dataset's columns
    std::vector<OneHotRule> onehot;   // one per categorical column when enabled
    PreprocessConfig config;
    std::vector<std::string> warnings;
    bool operator==(const PreprocessPlan&) const = default;
};

// Imputation values: column median for numeric columns (linear-interpolation
// quantile, the numpy default), most frequent value for binary/categorical
// (ties to the smaller value). Outlier fences: [Q1 - k*IQR, Q3 + k*IQR] with
// the same quantile definition, skipping binary columns. All statistics come
// from non-missing cells of ds alone.
PreprocessPlan fit_preprocessor(const Dataset& ds, const PreprocessConfig& config = {});

// Application order: outlier-row removal (training only, raw values, missing
// cells never trigger a fence), imputation, duplicate-row removal (training
// only, post-imputation values), then one-hot expansion in column order.
// Each categorical expansion emits one 0/1 column per fit-time level plus an
// explicit "<col>=__other__" column that absorbs unseen levels, so row sums
// over an expansion block are always 1.
Dataset apply_preprocessor(const PreprocessPlan& plan, const Dataset& ds,
                           bool training = false);

// Deduplicates feature rows (first occurrence wins), then undersamples the
// majority class to the minority count with the given seed. Output keeps
// original row order.
Dataset balance_unique(const Dataset& ds, std::uint64_t seed);

}  // namespace automal
