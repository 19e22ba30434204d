#include "automal/gbt.hpp"

#include <algorithm>
#include <cmath>

#include "automal/parallel.hpp"

namespace automal {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

constexpr double kLogOddsCap = 10.0;
constexpr double kMinGain = 1e-12;
constexpr double kProbEps = 1e-12;

struct BinStats {
    double g = 0.0;
    double h = 0.0;
    std::uint32_t count = 0;
};

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    int bin = -1;
    double gain = 0.0;
    double g_left = 0.0, h_left = 0.0;
};

double leaf_objective(double g, double h, double l2) { return g * g / (h + l2); }

class GbtTrainer {
public:
    GbtTrainer(const Matrix& x, const std::vector<int>& y, const GbtParams& params,
               const std::vector<FeatureKind>& kinds)
        : x_(x), y_(y), params_(params), kinds_(kinds), n_(x.rows()), d_(x.cols()) {}

    GbtModel train() {
        model_.params = params_;
        model_.n_features = d_;

        double y_mean = 0.0;
        for (int v : y_) y_mean += v;
        y_mean /= static_cast<double>(n_);
        model_.cat_prior = y_mean;

        if (y_mean == 0.0 || y_mean == 1.0) {
            model_.init_logodds = y_mean == 1.0 ? kLogOddsCap : -kLogOddsCap;
            model_.cat_encoding.assign(d_, {});
            model_.bin_edges.assign(d_, {});
            model_.logloss_trace.push_back(logloss_constant(model_.init_logodds));
            return std::move(model_);
        }
        model_.init_logodds =
            std::clamp(std::log(y_mean / (1.0 - y_mean)), -kLogOddsCap, kLogOddsCap);

        encode_categoricals();
        build_bins();

        score_.assign(n_, model_.init_logodds);
        grad_.resize(n_);
        hess_.resize(n_);
        refresh_gradients();

        for (int round = 0; round < params_.n_rounds; ++round) {
            model_.trees.push_back(grow_tree());
            apply_leaf_values(model_.trees.back());
            refresh_gradients();
            model_.logloss_trace.push_back(logloss());
        }
        return std::move(model_);
    }

private:
    void encode_categoricals() {
        model_.cat_encoding.assign(d_, {});
        encoded_ = Matrix(n_, d_);
        for (std::size_t c = 0; c < d_; ++c) {
            const bool smooth = params_.categorical_smoothing && c < kinds_.size() &&
                                kinds_[c] == FeatureKind::categorical;
            if (!smooth) {
                for (std::size_t r = 0; r < n_; ++r) encoded_(r, c) = x_(r, c);
                continue;
            }
            double max_code = 0.0;
            for (std::size_t r = 0; r < n_; ++r) max_code = std::max(max_code, x_(r, c));
            std::vector<double> sum(static_cast<std::size_t>(max_code) + 1, 0.0);
            std::vector<double> count(sum.size(), 0.0);
            for (std::size_t r = 0; r < n_; ++r) {
                const auto code = static_cast<std::size_t>(x_(r, c));
                sum[code] += y_[r];
                count[code] += 1.0;
            }
            auto& enc = model_.cat_encoding[c];
            enc.resize(sum.size());
            for (std::size_t k = 0; k < sum.size(); ++k)
                enc[k] = (sum[k] + model_.cat_prior * params_.smoothing_strength) /
                         (count[k] + params_.smoothing_strength);
            for (std::size_t r = 0; r < n_; ++r)
                encoded_(r, c) = enc[static_cast<std::size_t>(x_(r, c))];
        }
    }

    void build_bins() {
        model_.bin_edges.assign(d_, {});
        binned_ = std::vector<std::uint8_t>(n_ * d_);
        n_bins_.assign(d_, 1);

        parallel_for(d_, [&](std::size_t c) {
            std::vector<double> vals(n_);
            for (std::size_t r = 0; r < n_; ++r) vals[r] = encoded_(r, c);
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

            auto& edges = model_.bin_edges[c];
            const auto max_bins = static_cast<std::size_t>(params_.max_bins);
            if (vals.size() <= 1) {
                // constant column: one bin, never splittable
            } else if (vals.size() <= max_bins) {
                edges.reserve(vals.size() - 1);
                for (std::size_t i = 0; i + 1 < vals.size(); ++i)
                    edges.push_back(vals[i] + (vals[i + 1] - vals[i]) / 2.0);
            } else {
                for (std::size_t b = 1; b < max_bins; ++b) {
                    const std::size_t rank = b * (vals.size() - 1) / max_bins;
                    const double e = vals[rank] + (vals[rank + 1] - vals[rank]) / 2.0;
                    if (edges.empty() || e > edges.back()) edges.push_back(e);
                }
            }
            n_bins_[c] = static_cast<int>(edges.size()) + 1;
            for (std::size_t r = 0; r < n_; ++r) {
                const double v = encoded_(r, c);
                const auto it = std::lower_bound(edges.begin(), edges.end(), v);
                binned_[r * d_ + c] = static_cast<std::uint8_t>(it - edges.begin());
            }
        });
    }

    void refresh_gradients() {
        parallel_for(n_, [&](std::size_t i) {
            const double p = sigmoid(score_[i]);
            grad_[i] = p - static_cast<double>(y_[i]);
            hess_[i] = std::max(p * (1.0 - p), 1e-16);
        });
    }

    double logloss() const {
        const double total = parallel_sum(n_, [&](std::size_t i) {
            const double p = std::clamp(sigmoid(score_[i]), kProbEps, 1.0 - kProbEps);
            return y_[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
        });
        return total / static_cast<double>(n_);
    }

    double logloss_constant(double logodds) const {
        const double p = std::clamp(sigmoid(logodds), kProbEps, 1.0 - kProbEps);
        double total = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            total += y_[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
        return total / static_cast<double>(n_);
    }

    struct BuildNode {
        std::vector<std::uint32_t> rows;
        double g = 0.0, h = 0.0;
        int depth = 0;
        int index = -1;  // position in the output tree
        SplitChoice split;
    };

    SplitChoice best_split(const BuildNode& node) {
        // Per-feature histograms land in disjoint slots and the final scan
        // runs in feature order, so the choice is thread-count invariant.
        std::vector<SplitChoice> per_feature(d_);
        parallel_for(d_, [&](std::size_t c) {
            const int nb = n_bins_[c];
            if (nb < 2) return;
            std::vector<BinStats> hist(static_cast<std::size_t>(nb));
            for (auto r : node.rows) {
                BinStats& bs = hist[binned_[static_cast<std::size_t>(r) * d_ + c]];
                bs.g += grad_[r];
                bs.h += hess_[r];
                bs.count += 1;
            }
            SplitChoice best;
            double gl = 0.0, hl = 0.0;
            std::uint32_t cl = 0;
            const double parent_obj = leaf_objective(node.g, node.h, params_.l2);
            for (int b = 0; b + 1 < nb; ++b) {
                const auto& bs = hist[static_cast<std::size_t>(b)];
                gl += bs.g;
                hl += bs.h;
                cl += bs.count;
                if (cl == 0 || cl == node.rows.size()) continue;
                const double hr = node.h - hl;
                if (hl < params_.min_child_hessian || hr < params_.min_child_hessian)
                    continue;
                const double gr = node.g - gl;
                const double gain = leaf_objective(gl, hl, params_.l2) +
                                    leaf_objective(gr, hr, params_.l2) - parent_obj;
                if (!best.found || gain > best.gain) {
                    best.found = true;
                    best.feature = c;
                    best.bin = b;
                    best.gain = gain;
                    best.g_left = gl;
                    best.h_left = hl;
                }
            }
            per_feature[c] = best;
        });

        SplitChoice overall;
        for (std::size_t c = 0; c < d_; ++c)
            if (per_feature[c].found &&
                (!overall.found || per_feature[c].gain > overall.gain))
                overall = per_feature[c];
        if (overall.found && overall.gain <= kMinGain) overall.found = false;
        return overall;
    }

    std::vector<GbtNode> grow_tree() {
        std::vector<GbtNode> tree;
        std::vector<BuildNode> open;

        BuildNode root;
        root.rows.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) root.rows[i] = static_cast<std::uint32_t>(i);
        for (std::size_t i = 0; i < n_; ++i) {
            root.g += grad_[i];
            root.h += hess_[i];
        }
        root.index = 0;
        tree.emplace_back();
        root.split = best_split(root);
        open.push_back(std::move(root));

        int leaves = 1;
        const int depth_cap =
            params_.growth == GbtGrowth::depth_wise ? params_.max_depth : 64;

        while (leaves < params_.max_leaves) {
            // Leaf-wise takes the open leaf with the best gain; depth-wise
            // the shallowest, which expands level by level. Ties settle on
            // the earlier node.
            std::size_t pick = open.size();
            for (std::size_t i = 0; i < open.size(); ++i) {
                if (!open[i].split.found || open[i].depth >= depth_cap) continue;
                if (pick == open.size()) {
                    pick = i;
                    continue;
                }
                if (params_.growth == GbtGrowth::leaf_wise) {
                    if (open[i].split.gain > open[pick].split.gain) pick = i;
                } else {
                    if (open[i].depth < open[pick].depth) pick = i;
                }
            }
            if (pick == open.size()) break;

            BuildNode node = std::move(open[pick]);
            open.erase(open.begin() + static_cast<long>(pick));

            BuildNode left, right;
            left.depth = right.depth = node.depth + 1;
            left.g = node.split.g_left;
            left.h = node.split.h_left;
            right.g = node.g - left.g;
            right.h = node.h - left.h;
            const std::size_t f = node.split.feature;
            const int split_bin = node.split.bin;
            for (auto r : node.rows) {
                if (binned_[static_cast<std::size_t>(r) * d_ + f] <=
                    static_cast<std::uint32_t>(split_bin))
                    left.rows.push_back(r);
                else
                    right.rows.push_back(r);
            }

            tree[static_cast<std::size_t>(node.index)].feature = static_cast<int>(f);
            tree[static_cast<std::size_t>(node.index)].threshold =
                model_.bin_edges[f][static_cast<std::size_t>(split_bin)];
            const int l = static_cast<int>(tree.size());
            tree.emplace_back();
            const int r = static_cast<int>(tree.size());
            tree.emplace_back();
            tree[static_cast<std::size_t>(node.index)].left = l;
            tree[static_cast<std::size_t>(node.index)].right = r;
            left.index = l;
            right.index = r;

            left.split = best_split(left);
            right.split = best_split(right);
            open.push_back(std::move(left));
            open.push_back(std::move(right));
            ++leaves;
        }

        leaf_rows_.clear();
        for (auto& node : open) {
            tree[static_cast<std::size_t>(node.index)].value =
                -node.g / (node.h + params_.l2) * params_.learning_rate;
            leaf_rows_.push_back({node.index, std::move(node.rows)});
        }
        return tree;
    }

    void apply_leaf_values(const std::vector<GbtNode>& tree) {
        for (auto& [index, rows] : leaf_rows_) {
            const double value = tree[static_cast<std::size_t>(index)].value;
            for (auto r : rows) score_[r] += value;
        }
        leaf_rows_.clear();
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    GbtParams params_;
    const std::vector<FeatureKind>& kinds_;
    std::size_t n_, d_;

    GbtModel model_;
    Matrix encoded_;
    std::vector<std::uint8_t> binned_;
    std::vector<int> n_bins_;
    std::vector<double> score_, grad_, hess_;
    std::vector<std::pair<int, std::vector<std::uint32_t>>> leaf_rows_;
};

}  // namespace

GbtModel train_gbt(const Matrix& x, const std::vector<int>& y, const GbtParams& params,
                   const std::vector<FeatureKind>& kinds) {
    if (x.rows() == 0) throw ValueError("train_gbt: empty training data");
    if (x.rows() != y.size()) throw ValueError("train_gbt: label length mismatch");
    if (params.n_rounds < 1) throw ValueError("train_gbt: n_rounds must be at least 1");
    if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0))
        throw ValueError("train_gbt: learning_rate must lie in (0, 1]");
    if (params.max_bins < 2 || params.max_bins > 255)
        throw ValueError("train_gbt: max_bins must lie in [2, 255]");
    if (params.max_leaves < 2) throw ValueError("train_gbt: max_leaves must be at least 2");
    GbtTrainer trainer(x, y, params, kinds);
    return trainer.train();
}

double GbtModel::predict_logodds(const double* x) const {
    double score = init_logodds;
    for (const auto& tree : trees) {
        int id = 0;
        while (tree[static_cast<std::size_t>(id)].feature >= 0) {
            const auto& node = tree[static_cast<std::size_t>(id)];
            const auto f = static_cast<std::size_t>(node.feature);
            double v = x[f];
            if (f < cat_encoding.size() && !cat_encoding[f].empty()) {
                const auto code = static_cast<long long>(v);
                if (code >= 0 && static_cast<std::size_t>(code) < cat_encoding[f].size() &&
                    v == static_cast<double>(code))
                    v = cat_encoding[f][static_cast<std::size_t>(code)];
                else
                    v = cat_prior;
            }
            id = v <= node.threshold ? node.left : node.right;
        }
        score += tree[static_cast<std::size_t>(id)].value;
    }
    return score;
}

std::array<double, 2> GbtModel::predict_row(const double* x) const {
    const double p1 = sigmoid(predict_logodds(x));
    return {1.0 - p1, p1};
}

}  // namespace automal
