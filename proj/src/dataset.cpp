#include "automal/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "automal/rng.hpp"

namespace automal {

const char* to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::binary: return "binary";
        case FeatureKind::numeric: return "numeric";
        case FeatureKind::categorical: return "categorical";
    }
    return "unknown";
}

void Dataset::validate() const {
    if (features.rows() != labels.size())
        throw ValueError("Dataset: row count does not match label count");
    if (features.cols() != feature_names.size())
        throw ValueError("Dataset: column count does not match name count");
    if (features.cols() != feature_kinds.size())
        throw ValueError("Dataset: column count does not match kind count");
    std::unordered_set<std::string> seen;
    for (const auto& n : feature_names)
        if (!seen.insert(n).second)
            throw ValueError("Dataset: duplicate feature name '" + n + "'");
    for (int y : labels)
        if (y != 0 && y != 1) throw ValueError("Dataset: label outside {0,1}");
}

Dataset Dataset::subset_rows(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.features = features.select_rows(idx);
    out.labels.reserve(idx.size());
    for (auto i : idx) out.labels.push_back(labels[i]);
    out.feature_names = feature_names;
    out.feature_kinds = feature_kinds;
    out.levels = levels;
    out.source_id = source_id;
    return out;
}

Dataset Dataset::subset_cols(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.features = features.select_cols(idx);
    out.labels = labels;
    out.source_id = source_id;
    out.feature_names.reserve(idx.size());
    out.feature_kinds.reserve(idx.size());
    out.levels.reserve(idx.size());
    for (auto c : idx) {
        out.feature_names.push_back(feature_names[c]);
        out.feature_kinds.push_back(feature_kinds[c]);
        out.levels.push_back(c < levels.size() ? levels[c] : std::vector<std::string>{});
    }
    return out;
}

std::vector<std::size_t> Dataset::rows_of_class(int label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) out.push_back(i);
    return out;
}

std::size_t Dataset::count_class(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

namespace {

// Splits one CSV record, honoring quotes. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string cell;
    bool in_quotes = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    cell.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(cell);
            cell.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(cell);
    return true;
}

bool parse_number(const std::string& s, double& out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end == begin || errno == ERANGE) return false;
    while (*end == ' ' || *end == '\t') ++end;
    if (*end != '\0') return false;
    out = v;
    return true;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_csv: cannot open '" + path + "'");

    std::vector<std::string> header;
    if (!read_record(in, header) || (header.size() == 1 && trim(header[0]).empty()))
        throw IoError("load_csv: empty file '" + path + "'");
    for (auto& h : header) h = trim(h);

    std::size_t label_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == options.label_column) label_col = i;
    if (label_col == header.size())
        throw ValueError("load_csv: label column '" + options.label_column +
                         "' not found in '" + path + "'");

    const std::set<std::string> missing(options.missing_tokens.begin(),
                                        options.missing_tokens.end());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> rec;
    std::size_t line_no = 1;
    while (read_record(in, rec)) {
        ++line_no;
        if (rec.size() == 1 && trim(rec[0]).empty()) continue;  // blank line
        if (rec.size() != header.size())
            throw IoError("load_csv: line " + std::to_string(line_no) + " has " +
                          std::to_string(rec.size()) + " fields, expected " +
                          std::to_string(header.size()));
        for (auto& f : rec) f = trim(f);
        rows.push_back(rec);
    }
    if (rows.empty()) throw IoError("load_csv: no data rows in '" + path + "'");

    const std::size_t n = rows.size();
    const std::size_t d = header.size() - 1;

    // Column classification pass.
    Dataset ds;
    ds.source_id = path;
    ds.features = Matrix(n, d);
    ds.labels.assign(n, 0);
    ds.feature_names.reserve(d);
    ds.feature_kinds.assign(d, FeatureKind::numeric);
    ds.levels.assign(d, {});

    std::size_t out_c = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == label_col) continue;
        ds.feature_names.push_back(header[c]);

        bool all_numeric = true, any_numeric = false, any_text = false, all_binary = true;
        for (std::size_t r = 0; r < n; ++r) {
            const std::string& cell = rows[r][c];
            if (missing.count(cell)) continue;
            double v;
            if (parse_number(cell, v)) {
                any_numeric = true;
                if (v != 0.0 && v != 1.0) all_binary = false;
            } else {
                all_numeric = false;
                any_text = true;
            }
        }
        if (!all_numeric && any_numeric && options.strict)
            throw ValueError("load_csv: non-numeric cell in numeric column '" + header[c] +
                             "' (strict mode)");

        if (all_numeric) {
            ds.feature_kinds[out_c] = all_binary && any_numeric ? FeatureKind::binary
                                                                : FeatureKind::numeric;
            for (std::size_t r = 0; r < n; ++r) {
                const std::string& cell = rows[r][c];
                if (missing.count(cell)) {
                    ds.features(r, out_c) = missing_value();
                } else {
                    double v = 0;
                    parse_number(cell, v);
                    ds.features(r, out_c) = v;
                }
            }
        } else {
            (void)any_text;
            ds.feature_kinds[out_c] = FeatureKind::categorical;
            std::set<std::string> lvl;
            for (std::size_t r = 0; r < n; ++r)
                if (!missing.count(rows[r][c])) lvl.insert(rows[r][c]);
            ds.levels[out_c].assign(lvl.begin(), lvl.end());
            std::map<std::string, std::size_t> code;
            for (std::size_t i = 0; i < ds.levels[out_c].size(); ++i)
                code[ds.levels[out_c][i]] = i;
            for (std::size_t r = 0; r < n; ++r) {
                const std::string& cell = rows[r][c];
                ds.features(r, out_c) = missing.count(cell)
                                            ? missing_value()
                                            : static_cast<double>(code[cell]);
            }
        }
        ++out_c;
    }

    // Label mapping. Values already in {0,1} pass through; otherwise exactly
    // two distinct values are required and the malware one maps to 1.
    std::set<std::string> label_values;
    for (std::size_t r = 0; r < n; ++r) {
        if (missing.count(rows[r][label_col]))
            throw ValueError("load_csv: missing label at data row " + std::to_string(r + 1));
        label_values.insert(rows[r][label_col]);
    }
    bool canonical = true;
    for (const auto& v : label_values) {
        double num;
        if (!parse_number(v, num) || (num != 0.0 && num != 1.0)) canonical = false;
    }
    if (canonical && options.malware_label.empty()) {
        for (std::size_t r = 0; r < n; ++r) {
            double num = 0;
            parse_number(rows[r][label_col], num);
            ds.labels[r] = num == 1.0 ? 1 : 0;
        }
        ds.validate();
        return ds;
    }

    if (label_values.size() != 2)
        throw ValueError("load_csv: label column must have exactly 2 distinct values, got " +
                         std::to_string(label_values.size()));

    std::string positive;
    if (!options.malware_label.empty()) {
        if (!label_values.count(options.malware_label))
            throw ValueError("load_csv: configured malware label '" + options.malware_label +
                             "' not present in data");
        positive = options.malware_label;
    } else {
        double a, b;
        auto it = label_values.begin();
        const std::string first = *it++;
        const std::string second = *it;
        if (parse_number(first, a) && parse_number(second, b)) {
            positive = a > b ? first : second;
        } else {
            positive = std::max(first, second);
        }
    }
    for (std::size_t r = 0; r < n; ++r)
        ds.labels[r] = rows[r][label_col] == positive ? 1 : 0;

    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_csv: cannot open '" + path + "' for writing");

    auto needs_quotes = [](const std::string& s) {
        return s.find_first_of(",\"\n") != std::string::npos;
    };
    auto emit = [&](const std::string& s) {
        if (!needs_quotes(s)) {
            out << s;
            return;
        }
        out << '"';
        for (char c : s) {
            if (c == '"') out << '"';
            out << c;
        }
        out << '"';
    };

    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        emit(ds.feature_names[c]);
        out << ',';
    }
    emit(label_column);
    out << '\n';

    char buf[64];
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        for (std::size_t c = 0; c < ds.n_cols(); ++c) {
            double v = ds.features(r, c);
            if (is_missing(v)) {
                // empty cell
            } else if (ds.feature_kinds[c] == FeatureKind::categorical) {
                auto idx = static_cast<std::size_t>(v);
                if (idx < ds.levels[c].size())
                    emit(ds.levels[c][idx]);
                else
                    emit("__other__");
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << buf;
            }
            out << ',';
        }
        out << ds.labels[r] << '\n';
    }
    if (!out) throw IoError("save_csv: write failure on '" + path + "'");
}

SplitPlan split_holdout(const Dataset& ds, double ratio, std::uint64_t seed, bool stratified) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ValueError("split_holdout: ratio must lie in (0,1)");
    const std::size_t n = ds.n_rows();
    if (n < 2) throw ValueError("split_holdout: need at least 2 rows");
    const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw ValueError("split_holdout: ratio leaves an empty partition");

    SplitPlan plan;
    plan.seed = seed;
    plan.ratio = ratio;
    plan.stratified = stratified;

    Rng rng(derive_seed(seed, 0x5917));

    if (!stratified) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        rng.shuffle(idx);
        plan.train_indices.assign(idx.begin(), idx.begin() + static_cast<long>(n_train));
        plan.test_indices.assign(idx.begin() + static_cast<long>(n_train), idx.end());
    } else {
        std::vector<std::vector<std::size_t>> per_class = {ds.rows_of_class(0),
                                                           ds.rows_of_class(1)};
        for (const auto& cls : per_class)
            if (cls.empty())
                throw ValueError("split_holdout: degenerate class under stratification");
        for (auto& cls : per_class) rng.shuffle(cls);

        // Floor each class's share, then hand the remaining train slots to
        // classes by largest fractional part (lower class id on ties).
        std::size_t assigned = 0;
        std::vector<std::size_t> take(per_class.size());
        std::vector<double> frac(per_class.size());
        for (std::size_t c = 0; c < per_class.size(); ++c) {
            double exact = ratio * static_cast<double>(per_class[c].size());
            take[c] = static_cast<std::size_t>(exact);
            frac[c] = exact - static_cast<double>(take[c]);
            assigned += take[c];
        }
        std::vector<std::size_t> order(per_class.size());
        for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
        for (std::size_t i = 0; assigned < n_train && i < order.size(); ++i) {
            if (take[order[i]] < per_class[order[i]].size()) {
                ++take[order[i]];
                ++assigned;
            }
        }
        // Rounding can still under/overshoot by one when fractions tie; fix up.
        for (std::size_t c = 0; assigned < n_train && c < per_class.size(); ++c)
            while (assigned < n_train && take[c] < per_class[c].size()) ++take[c], ++assigned;
        for (std::size_t c = 0; assigned > n_train && c < per_class.size(); ++c)
            while (assigned > n_train && take[c] > 0) --take[c], --assigned;

        for (std::size_t c = 0; c < per_class.size(); ++c) {
            for (std::size_t i = 0; i < per_class[c].size(); ++i) {
                if (i < take[c])
                    plan.train_indices.push_back(per_class[c][i]);
                else
                    plan.test_indices.push_back(per_class[c][i]);
            }
        }
    }
    std::sort(plan.train_indices.begin(), plan.train_indices.end());
    std::sort(plan.test_indices.begin(), plan.test_indices.end());
    if (plan.train_indices.empty() || plan.test_indices.empty())
        throw ValueError("split_holdout: a partition came out empty");
    return plan;
}

std::vector<std::size_t> FoldPlan::fold_rows(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_assignments.size(); ++i)
        if (fold_assignments[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::complement_rows(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_assignments.size(); ++i)
        if (fold_assignments[i] != fold) out.push_back(i);
    return out;
}

FoldPlan kfold_plan(const Dataset& ds, int k, std::uint64_t seed, bool stratified) {
    const std::size_t n = ds.n_rows();
    if (k < 2) throw ValueError("kfold_plan: k must be at least 2");
    if (static_cast<std::size_t>(k) > n)
        throw ValueError("kfold_plan: k exceeds the number of rows");

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.stratified = stratified;
    plan.fold_assignments.assign(n, -1);

    Rng rng(derive_seed(seed, 0xf01d));

    if (!stratified) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        rng.shuffle(idx);
        for (std::size_t i = 0; i < n; ++i)
            plan.fold_assignments[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    } else {
        std::vector<std::vector<std::size_t>> per_class = {ds.rows_of_class(0),
                                                           ds.rows_of_class(1)};
        for (const auto& cls : per_class)
            if (!cls.empty() && cls.size() < static_cast<std::size_t>(k))
                throw ValueError("kfold_plan: k exceeds the minority class count");
        std::size_t deal = 0;  // dealing position carried across classes
        for (auto& cls : per_class) {
            rng.shuffle(cls);
            for (std::size_t i = 0; i < cls.size(); ++i) {
                plan.fold_assignments[cls[i]] =
                    static_cast<int>(deal % static_cast<std::size_t>(k));
                ++deal;
            }
        }
    }

    for (int f = 0; f < k; ++f)
        if (std::count(plan.fold_assignments.begin(), plan.fold_assignments.end(), f) == 0)
            throw ValueError("kfold_plan: produced an empty fold");
    return plan;
}

}  // namespace automal
