#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "automal/matrix.hpp"

namespace automal {

enum class FeatureKind { binary, numeric, categorical };

const char* to_string(FeatureKind k);

// One loaded table: dense feature matrix, 0/1 labels (1 = malware), and
// per-column metadata. Treated as immutable after construction; all
// transforms return a new Dataset.
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> feature_kinds;
    // Level strings for categorical columns (cell value = index into this
    // list); empty for binary/numeric columns.
    std::vector<std::vector<std::string>> levels;
    std::string source_id;

    std::size_t n_rows() const { return features.rows(); }
    std::size_t n_cols() const { return features.cols(); }

    // Throws unless row/label counts agree, names are unique, and labels
    // are all 0 or 1.
    void validate() const;

    Dataset subset_rows(const std::vector<std::size_t>& idx) const;
    Dataset subset_cols(const std::vector<std::size_t>& idx) const;

    std::vector<std::size_t> rows_of_class(int label) const;
    std::size_t count_class(int label) const;
};

struct CsvOptions {
    std::string label_column = "class";
    // Which raw label value maps to 1. Empty = automatic: numeric 1 for 0/1
    // labels, otherwise the lexicographically greater of the two values
    // (so {"benign","malware"} maps malware to 1).
    std::string malware_label;
    // Strict mode rejects columns that mix numeric and non-numeric cells;
    // the default demotes such columns to categorical.
    bool strict = false;
    std::vector<std::string> missing_tokens = {"", "?", "NA", "NaN", "nan", "null"};
};

// Parses a UTF-8, comma-separated, header-first CSV. Quoted fields with ""
// escapes are honored. Row order is preserved. A column whose non-missing
// values are all 0/1 is tagged binary; all-numeric columns are numeric;
// anything else becomes categorical with levels sorted lexicographically.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

// Inverse of load_csv for finite values: numerics with round-trip precision,
// categoricals as their level strings, labels under `label_column` as 0/1.
void save_csv(const Dataset& ds, const std::string& path,
              const std::string& label_column = "class");

// Single train/test partition. Index lists are disjoint, sorted, and cover
// every row exactly once.
struct SplitPlan {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::uint64_t seed = 0;
    double ratio = 0.8;
    bool stratified = true;
};

// |train| = round(ratio * n). Stratified mode keeps each class's train share
// within one sample of the global ratio; remainder slots go to the classes
// with the largest fractional part (ties to the lower class).
SplitPlan split_holdout(const Dataset& ds, double ratio, std::uint64_t seed,
                        bool stratified = true);

struct FoldPlan {
    int k = 5;
    std::vector<int> fold_assignments;  // per row, in [0, k)
    std::uint64_t seed = 0;
    bool stratified = true;

    std::vector<std::size_t> fold_rows(int fold) const;
    std::vector<std::size_t> complement_rows(int fold) const;
};

// Deals shuffled rows to folds cyclically (per class when stratified, with
// the dealing position carried across classes), so fold sizes differ by at
// most one and per-fold class counts stay within one of perfect
// stratification.
FoldPlan kfold_plan(const Dataset& ds, int k, std::uint64_t seed,
                    bool stratified = true);

}  // namespace automal
