#include "automal/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "automal/rng.hpp"

namespace automal {

namespace {

// Linear-interpolation quantile on a sorted vector (numpy's default).
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> non_missing_sorted(const Matrix& m, std::size_t c) {
    std::vector<double> v;
    v.reserve(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (!is_missing(m(r, c))) v.push_back(m(r, c));
    std::sort(v.begin(), v.end());
    return v;
}

double mode_of(const std::vector<double>& sorted) {
    double best = sorted[0];
    std::size_t best_count = 0, i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        if (j - i > best_count) {  // ties keep the smaller value
            best_count = j - i;
            best = sorted[i];
        }
        i = j;
    }
    return best;
}

std::string feature_row_key(const Matrix& m, std::size_t r) {
    std::string key(m.cols() * sizeof(double), '\0');
    const double* src = m.row_ptr(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double v = is_missing(src[c]) ? std::numeric_limits<double>::quiet_NaN() : src[c];
        if (v == 0.0) v = 0.0;
        std::memcpy(key.data() + c * sizeof(double), &v, sizeof(double));
    }
    return key;
}

}  // namespace

PreprocessPlan fit_preprocessor(const Dataset& ds, const PreprocessConfig& config) {
    if (ds.n_rows() == 0) throw ValueError("fit_preprocessor: empty dataset");

    PreprocessPlan plan;
    plan.config = config;
    plan.columns.reserve(ds.n_cols());

    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        ColumnRule rule;
        rule.name = ds.feature_names[c];
        rule.kind = ds.feature_kinds[c];

        auto sorted = non_missing_sorted(ds.features, c);
        if (sorted.empty()) {
            rule.drop = true;
            plan.warnings.push_back("column '" + rule.name + "' is entirely missing; dropped");
            plan.columns.push_back(rule);
            continue;
        }

        if (rule.kind == FeatureKind::numeric)
            rule.impute = quantile_sorted(sorted, 0.5);
        else
            rule.impute = mode_of(sorted);

        if (config.remove_outliers && rule.kind == FeatureKind::numeric) {
            const double q1 = quantile_sorted(sorted, 0.25);
            const double q3 = quantile_sorted(sorted, 0.75);
            const double iqr = q3 - q1;
            rule.fence = true;
            rule.fence_lo = q1 - config.iqr_k * iqr;
            rule.fence_hi = q3 + config.iqr_k * iqr;
        }
        plan.columns.push_back(rule);
    }

    if (config.encode_onehot) {
        for (std::size_t c = 0; c < ds.n_cols(); ++c) {
            if (ds.feature_kinds[c] != FeatureKind::categorical || plan.columns[c].drop)
                continue;
            OneHotRule oh;
            oh.source_col = c;
            oh.source_name = ds.feature_names[c];
            std::vector<double> codes;
            for (std::size_t r = 0; r < ds.n_rows(); ++r)
                if (!is_missing(ds.features(r, c))) codes.push_back(ds.features(r, c));
            std::sort(codes.begin(), codes.end());
            codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
            oh.codes = codes;
            for (double code : codes) {
                auto idx = static_cast<std::size_t>(code);
                const std::string level = c < ds.levels.size() && idx < ds.levels[c].size()
                                              ? ds.levels[c][idx]
                                              : std::to_string(idx);
                oh.names.push_back(oh.source_name + "=" + level);
            }
            oh.names.push_back(oh.source_name + "=__other__");
            plan.onehot.push_back(oh);
        }
    }
    return plan;
}

Dataset apply_preprocessor(const PreprocessPlan& plan, const Dataset& ds, bool training) {
    if (ds.n_cols() != plan.columns.size())
        throw ValueError("apply_preprocessor: column count differs from the fitted plan");
    for (std::size_t c = 0; c < ds.n_cols(); ++c)
        if (ds.feature_names[c] != plan.columns[c].name)
            throw ValueError("apply_preprocessor: column '" + ds.feature_names[c] +
                             "' does not match plan column '" + plan.columns[c].name + "'");

    // Row filtering happens on training data only.
    std::vector<std::size_t> keep_rows;
    keep_rows.reserve(ds.n_rows());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        bool keep = true;
        if (training && plan.config.remove_outliers) {
            for (std::size_t c = 0; c < ds.n_cols() && keep; ++c) {
                const ColumnRule& rule = plan.columns[c];
                if (!rule.fence || rule.drop) continue;
                const double v = ds.features(r, c);
                if (!is_missing(v) && (v < rule.fence_lo || v > rule.fence_hi)) keep = false;
            }
        }
        if (keep) keep_rows.push_back(r);
    }

    // Impute into the surviving rows, dropping all-missing columns.
    std::vector<std::size_t> keep_cols;
    for (std::size_t c = 0; c < plan.columns.size(); ++c)
        if (!plan.columns[c].drop) keep_cols.push_back(c);

    Matrix imputed(keep_rows.size(), keep_cols.size());
    std::vector<int> labels(keep_rows.size());
    for (std::size_t i = 0; i < keep_rows.size(); ++i) {
        labels[i] = ds.labels[keep_rows[i]];
        for (std::size_t j = 0; j < keep_cols.size(); ++j) {
            const double v = ds.features(keep_rows[i], keep_cols[j]);
            imputed(i, j) = is_missing(v) ? plan.columns[keep_cols[j]].impute : v;
        }
    }

    if (training && plan.config.drop_duplicates) {
        std::unordered_set<std::string> seen;
        std::vector<std::size_t> distinct;
        for (std::size_t r = 0; r < imputed.rows(); ++r)
            if (seen.insert(feature_row_key(imputed, r)).second) distinct.push_back(r);
        if (distinct.size() != imputed.rows()) {
            Matrix dd = imputed.select_rows(distinct);
            std::vector<int> dl(distinct.size());
            for (std::size_t i = 0; i < distinct.size(); ++i) dl[i] = labels[distinct[i]];
            imputed = std::move(dd);
            labels = std::move(dl);
        }
    }

    // Column assembly with in-place one-hot expansion.
    std::unordered_map<std::size_t, const OneHotRule*> onehot_by_col;
    for (const auto& oh : plan.onehot) onehot_by_col[oh.source_col] = &oh;

    Dataset out;
    out.source_id = ds.source_id;
    out.labels = labels;

    std::vector<std::vector<double>> out_cols;
    for (std::size_t j = 0; j < keep_cols.size(); ++j) {
        const std::size_t c = keep_cols[j];
        auto it = onehot_by_col.find(c);
        if (it == onehot_by_col.end()) {
            out.feature_names.push_back(plan.columns[c].name);
            out.feature_kinds.push_back(plan.columns[c].kind);
            out.levels.push_back(c < ds.levels.size() ? ds.levels[c]
                                                      : std::vector<std::string>{});
            out_cols.push_back(imputed.column(j));
            continue;
        }
        const OneHotRule& oh = *it->second;
        const std::size_t width = oh.codes.size() + 1;  // levels + other
        std::vector<std::vector<double>> block(width,
                                               std::vector<double>(imputed.rows(), 0.0));
        for (std::size_t r = 0; r < imputed.rows(); ++r) {
            const double v = imputed(r, j);
            auto pos = std::lower_bound(oh.codes.begin(), oh.codes.end(), v);
            if (pos != oh.codes.end() && *pos == v)
                block[static_cast<std::size_t>(pos - oh.codes.begin())][r] = 1.0;
            else
                block[width - 1][r] = 1.0;  // unseen level routes to other
        }
        for (std::size_t b = 0; b < width; ++b) {
            out.feature_names.push_back(oh.names[b]);
            out.feature_kinds.push_back(FeatureKind::binary);
            out.levels.emplace_back();
            out_cols.push_back(std::move(block[b]));
        }
    }

    out.features = Matrix(imputed.rows(), out_cols.size());
    for (std::size_t c = 0; c < out_cols.size(); ++c)
        for (std::size_t r = 0; r < imputed.rows(); ++r) out.features(r, c) = out_cols[c][r];

    out.validate();
    return out;
}

Dataset balance_unique(const Dataset& ds, std::uint64_t seed) {
    if (ds.count_class(0) == 0 || ds.count_class(1) == 0)
        throw ValueError("balance_unique: both classes must be present");

    // Feature-level dedup, first occurrence wins.
    std::unordered_set<std::string> seen;
    std::vector<std::size_t> unique_rows;
    for (std::size_t r = 0; r < ds.n_rows(); ++r)
        if (seen.insert(feature_row_key(ds.features, r)).second) unique_rows.push_back(r);

    std::vector<std::size_t> by_class[2];
    for (auto r : unique_rows) by_class[ds.labels[r]].push_back(r);
    if (by_class[0].empty() || by_class[1].empty())
        throw ValueError("balance_unique: a class was emptied by deduplication");

    const int majority = by_class[1].size() > by_class[0].size() ? 1 : 0;
    const std::size_t target = by_class[1 - majority].size();

    Rng rng(derive_seed(seed, 0xba1a));
    auto pick = rng.sample_without_replacement(by_class[majority].size(), target);

    std::vector<std::size_t> keep = by_class[1 - majority];
    for (auto i : pick) keep.push_back(by_class[majority][i]);
    std::sort(keep.begin(), keep.end());
    return ds.subset_rows(keep);
}

}  // namespace automal
