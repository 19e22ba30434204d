#include "automal/tree.hpp"

#include <algorithm>
#include <numeric>

#include "automal/rng.hpp"

namespace automal {

namespace {

struct Candidate {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = -1.0;
};

// Purity score of a (left, right) count split; higher is better. Computed
// from integer counts with one fixed expression so equal splits compare
// exactly equal.
double split_score(std::uint64_t c0l, std::uint64_t c1l, std::uint64_t c0r,
                   std::uint64_t c1r) {
    const double nl = static_cast<double>(c0l + c1l);
    const double nr = static_cast<double>(c0r + c1r);
    const double al = (static_cast<double>(c0l) * static_cast<double>(c0l) +
                       static_cast<double>(c1l) * static_cast<double>(c1l));
    const double ar = (static_cast<double>(c0r) * static_cast<double>(c0r) +
                       static_cast<double>(c1r) * static_cast<double>(c1r));
    return al / nl + ar / nr;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<int>& y, const TreeParams& params,
                int mtry, bool random_thresholds, Rng* rng)
        : x_(x), y_(y), params_(params), mtry_(mtry),
          random_thresholds_(random_thresholds), rng_(rng) {}

    TreeModel build(const std::vector<std::size_t>& rows) {
        model_.n_features = x_.cols();
        model_.params = params_;
        model_.train_rows = rows.size();
        std::vector<std::size_t> work = rows;
        grow(work, 0);
        return std::move(model_);
    }

private:
    int grow(std::vector<std::size_t>& rows, int depth) {
        const int id = static_cast<int>(model_.nodes.size());
        model_.nodes.emplace_back();

        std::uint64_t c1 = 0;
        for (auto r : rows) c1 += static_cast<std::uint64_t>(y_[r]);
        const std::uint64_t c0 = rows.size() - c1;

        auto& node = model_.nodes[id];
        node.n_samples = static_cast<std::uint32_t>(rows.size());
        node.prob[0] = static_cast<double>(c0) / static_cast<double>(rows.size());
        node.prob[1] = static_cast<double>(c1) / static_cast<double>(rows.size());

        const bool pure = c0 == 0 || c1 == 0;
        if (pure || depth >= params_.max_depth ||
            rows.size() < 2 * static_cast<std::size_t>(params_.min_samples_leaf))
            return id;

        Candidate best = find_split(rows, c0, c1);
        if (!best.found) return id;

        std::vector<std::size_t> left, right;
        left.reserve(rows.size());
        right.reserve(rows.size());
        for (auto r : rows)
            (x_(r, best.feature) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        // nodes vector may reallocate during recursion; write fields via id.
        model_.nodes[id].feature = static_cast<int>(best.feature);
        model_.nodes[id].threshold = best.threshold;
        const int l = grow(left, depth + 1);
        model_.nodes[id].left = l;
        const int r = grow(right, depth + 1);
        model_.nodes[id].right = r;
        return id;
    }

    Candidate find_split(const std::vector<std::size_t>& rows, std::uint64_t /*c0*/,
                         std::uint64_t /*c1*/) {
        std::vector<std::size_t> feats;
        if (mtry_ > 0 && static_cast<std::size_t>(mtry_) < x_.cols()) {
            feats = rng_->sample_without_replacement(x_.cols(), static_cast<std::size_t>(mtry_));
        } else {
            feats.resize(x_.cols());
            std::iota(feats.begin(), feats.end(), 0);
        }

        Candidate best;
        for (auto f : feats) {
            Candidate c = random_thresholds_ ? random_split(rows, f) : exact_split(rows, f);
            // Strictly-better keeps the lowest feature index and lowest
            // threshold among exact ties (features ascend, thresholds ascend).
            if (c.found && (!best.found || c.score > best.score)) best = c;
        }
        return best;
    }

    Candidate exact_split(const std::vector<std::size_t>& rows, std::size_t f) {
        auto& vals = scratch_;
        vals.clear();
        vals.reserve(rows.size());
        for (auto r : rows) vals.push_back({x_(r, f), y_[r]});
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        Candidate best;
        const std::uint64_t n = vals.size();
        std::uint64_t c1_total = 0;
        for (const auto& v : vals) c1_total += static_cast<std::uint64_t>(v.second);
        const std::uint64_t c0_total = n - c1_total;

        const auto msl = static_cast<std::uint64_t>(params_.min_samples_leaf);
        std::uint64_t c0l = 0, c1l = 0;
        for (std::uint64_t i = 1; i < n; ++i) {
            c1l += static_cast<std::uint64_t>(vals[i - 1].second);
            c0l = i - c1l;
            if (vals[i - 1].first == vals[i].first) continue;
            if (i < msl || n - i < msl) continue;
            const double score = split_score(c0l, c1l, c0_total - c0l, c1_total - c1l);
            if (!best.found || score > best.score) {
                best.found = true;
                best.feature = f;
                best.threshold = midpoint(vals[i - 1].first, vals[i].first);
                best.score = score;
            }
        }
        return best;
    }

    Candidate random_split(const std::vector<std::size_t>& rows, std::size_t f) {
        double lo = x_(rows[0], f), hi = lo;
        for (auto r : rows) {
            lo = std::min(lo, x_(r, f));
            hi = std::max(hi, x_(r, f));
        }
        Candidate c;
        if (lo == hi) return c;
        const double t = rng_->uniform(lo, hi);
        std::uint64_t c0l = 0, c1l = 0, c0r = 0, c1r = 0;
        for (auto r : rows) {
            if (x_(r, f) <= t)
                (y_[r] == 1 ? c1l : c0l)++;
            else
                (y_[r] == 1 ? c1r : c0r)++;
        }
        const auto msl = static_cast<std::uint64_t>(params_.min_samples_leaf);
        if (c0l + c1l < msl || c0r + c1r < msl || c0l + c1l == 0 || c0r + c1r == 0) return c;
        c.found = true;
        c.feature = f;
        c.threshold = t;
        c.score = split_score(c0l, c1l, c0r, c1r);
        return c;
    }

    static double midpoint(double a, double b) {
        const double m = a + (b - a) / 2.0;
        // Guard against rounding to an endpoint for adjacent doubles.
        if (m <= a || m >= b) return a;
        return m;
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    TreeParams params_;
    int mtry_;
    bool random_thresholds_;
    Rng* rng_;
    TreeModel model_;
    std::vector<std::pair<double, int>> scratch_;
};

}  // namespace

TreeModel build_tree(const Matrix& x, const std::vector<int>& y,
                     const std::vector<std::size_t>& rows, const TreeParams& params,
                     int mtry, bool random_thresholds, Rng* rng) {
    if (rows.empty()) throw ValueError("build_tree: empty training data");
    if (x.rows() != y.size()) throw ValueError("build_tree: label length mismatch");
    if ((mtry > 0 || random_thresholds) && rng == nullptr)
        throw ValueError("build_tree: randomized growth needs an rng");
    TreeBuilder builder(x, y, params, mtry, random_thresholds, rng);
    return builder.build(rows);
}

TreeModel train_decision_tree(const Matrix& x, const std::vector<int>& y,
                              const TreeParams& params) {
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
    return build_tree(x, y, rows, params, 0, false, nullptr);
}

std::array<double, 2> TreeModel::predict_row(const double* x) const {
    int id = 0;
    while (nodes[id].feature >= 0)
        id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    return {nodes[id].prob[0], nodes[id].prob[1]};
}

std::vector<int> TreeModel::used_features() const {
    std::vector<int> out;
    for (const auto& n : nodes)
        if (n.feature >= 0) out.push_back(n.feature);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int TreeModel::depth() const {
    // Iterative depth over the preorder layout.
    if (nodes.empty()) return 0;
    std::vector<std::pair<int, int>> stack = {{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (nodes[id].feature >= 0) {
            stack.push_back({nodes[id].left, d + 1});
            stack.push_back({nodes[id].right, d + 1});
        }
    }
    return best;
}

}  // namespace automal
