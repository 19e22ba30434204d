#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "automal/metrics.hpp"
#include "automal/model.hpp"
#include "automal/trainers.hpp"
#include "helpers.hpp"

using namespace automal;

namespace {

// Exhaustive (feature, threshold) search with the same integer-count purity
// score and tie-breaks as the spec describes, recounted from scratch.
struct OracleSplit {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = -1.0;
};

OracleSplit oracle_best_split(const Matrix& x, const std::vector<int>& y,
                              const std::vector<std::size_t>& rows, int min_samples_leaf) {
    OracleSplit best;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        std::vector<double> values;
        for (auto r : rows) values.push_back(x(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double t = values[i] + (values[i + 1] - values[i]) / 2.0;
            std::uint64_t c0l = 0, c1l = 0, c0r = 0, c1r = 0;
            for (auto r : rows) {
                if (x(r, f) <= t)
                    (y[r] == 1 ? c1l : c0l)++;
                else
                    (y[r] == 1 ? c1r : c0r)++;
            }
            const auto nl = c0l + c1l, nr = c0r + c1r;
            if (nl < static_cast<std::uint64_t>(min_samples_leaf) ||
                nr < static_cast<std::uint64_t>(min_samples_leaf))
                continue;
            const double score =
                (static_cast<double>(c0l) * static_cast<double>(c0l) +
                 static_cast<double>(c1l) * static_cast<double>(c1l)) /
                    static_cast<double>(nl) +
                (static_cast<double>(c0r) * static_cast<double>(c0r) +
                 static_cast<double>(c1r) * static_cast<double>(c1r)) /
                    static_cast<double>(nr);
            if (!best.found || score > best.score) {
                best = {true, f, t, score};
            }
        }
    }
    return best;
}

TreeModel leaf_model(double p0, double p1) {
    TreeModel tree;
    TreeNode leaf;
    leaf.prob[0] = p0;
    leaf.prob[1] = p1;
    leaf.n_samples = 1;
    tree.nodes.push_back(leaf);
    tree.n_features = 2;
    return tree;
}

ModelArtifact wrap_tree(TreeModel tree, std::size_t n_features) {
    ModelArtifact a;
    a.family = ModelFamily::tree;
    a.n_features = n_features;
    tree.n_features = n_features;
    a.model = std::move(tree);
    return a;
}

}  // namespace

TEST_CASE("decision tree: 1-D fixture splits at 2.5 with perfect accuracy") {
    const Dataset ds = testutil::make_dataset({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
    const TreeModel tree = train_decision_tree(ds.features, ds.labels);
    REQUIRE(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == 2.5);
    for (std::size_t r = 0; r < 4; ++r) {
        const auto p = tree.predict_row(ds.features.row_ptr(r));
        CHECK((p[1] >= 0.5 ? 1 : 0) == ds.labels[r]);
    }
}

TEST_CASE("decision tree: pure labels give a single leaf") {
    const Dataset ds = testutil::make_dataset({{1}, {2}, {3}}, {1, 1, 1});
    const TreeModel tree = train_decision_tree(ds.features, ds.labels);
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].feature == -1);
    CHECK(tree.nodes[0].prob[1] == 1.0);
}

TEST_CASE("decision tree: XOR resolves at depth 2") {
    const Dataset ds =
        testutil::make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
    TreeParams params;
    params.max_depth = 2;
    const TreeModel tree = train_decision_tree(ds.features, ds.labels, params);
    CHECK(tree.depth() == 2);
    for (std::size_t r = 0; r < 4; ++r) {
        const auto p = tree.predict_row(ds.features.row_ptr(r));
        CHECK((p[1] >= p[0] ? 1 : 0) == ds.labels[r]);
    }
}

TEST_CASE("decision tree: greedy split equals exhaustive enumeration") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 5 + rng.below(46);
        const std::size_t d = 1 + rng.below(8);
        Matrix x(n, d);
        std::vector<int> y(n);
        bool has0 = false, has1 = false;
        for (std::size_t r = 0; r < n; ++r) {
            y[r] = static_cast<int>(rng.below(2));
            (y[r] ? has1 : has0) = true;
            for (std::size_t c = 0; c < d; ++c)
                x(r, c) = rng.below(2) ? static_cast<double>(rng.below(4))
                                       : rng.uniform(-1.0, 1.0);
        }
        if (!has0 || !has1) continue;

        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        const OracleSplit expected = oracle_best_split(x, y, rows, 1);
        const TreeModel tree = train_decision_tree(x, y);
        if (!expected.found) {
            CHECK(tree.nodes[0].feature == -1);
            continue;
        }
        REQUIRE(tree.nodes[0].feature == static_cast<int>(expected.feature));
        CHECK(tree.nodes[0].threshold == expected.threshold);
    }
}

TEST_CASE("decision tree: row order does not change the structure") {
    Rng rng(31337);
    Matrix x(30, 4);
    std::vector<int> y(30);
    for (std::size_t r = 0; r < 30; ++r) {
        y[r] = static_cast<int>(rng.below(2));
        for (std::size_t c = 0; c < 4; ++c) x(r, c) = static_cast<double>(rng.below(5));
    }
    y[0] = 0;
    y[1] = 1;
    const TreeModel base = train_decision_tree(x, y);

    std::vector<std::size_t> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Matrix px(30, 4);
    std::vector<int> py(30);
    for (std::size_t r = 0; r < 30; ++r) {
        py[r] = y[perm[r]];
        for (std::size_t c = 0; c < 4; ++c) px(r, c) = x(perm[r], c);
    }
    const TreeModel permuted = train_decision_tree(px, py);

    REQUIRE(base.nodes.size() == permuted.nodes.size());
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
        CHECK(base.nodes[i].feature == permuted.nodes[i].feature);
        CHECK(base.nodes[i].threshold == permuted.nodes[i].threshold);
        CHECK(base.nodes[i].prob[0] == permuted.nodes[i].prob[0]);
    }
}

TEST_CASE("forest: degenerate single tree equals the plain tree bitwise") {
    const Dataset ds = testutil::make_binary_signal(80, 6, 3, 7);
    ForestParams params;
    params.n_trees = 1;
    params.bootstrap = false;
    params.features_per_split = FeatureSubset::all;
    params.max_depth = 64;
    const ForestModel forest =
        train_forest(ds.features, ds.labels, params, ForestMode::random_forest);
    const TreeModel tree = train_decision_tree(ds.features, ds.labels);

    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        const auto pf = forest.predict_row(ds.features.row_ptr(r));
        const auto pt = tree.predict_row(ds.features.row_ptr(r));
        CHECK(pf[0] == pt[0]);
        CHECK(pf[1] == pt[1]);
    }
}

TEST_CASE("forest: fixed seed reproduces the model exactly") {
    const Dataset ds = testutil::make_binary_signal(100, 8, 4, 77);
    ForestParams params;
    params.n_trees = 12;
    params.seed = 5;
    for (auto mode : {ForestMode::random_forest, ForestMode::extra_trees}) {
        ModelArtifact a, b;
        a.family = b.family =
            mode == ForestMode::random_forest ? ModelFamily::random_forest
                                              : ModelFamily::extra_trees;
        a.model = train_forest(ds.features, ds.labels, params, mode);
        b.model = train_forest(ds.features, ds.labels, params, mode);
        a.n_features = b.n_features = ds.n_cols();
        CHECK(model_to_string(a) == model_to_string(b));
    }
}

TEST_CASE("forest: separable blobs reach holdout accuracy 0.95") {
    const Dataset ds = testutil::make_blobs(120, 2.0, 99);
    const SplitPlan split = split_holdout(ds, 0.75, 3, true);
    const Dataset train = ds.subset_rows(split.train_indices);
    const Dataset test = ds.subset_rows(split.test_indices);

    ForestParams params;
    params.n_trees = 25;
    params.seed = 11;
    const ForestModel forest =
        train_forest(train.features, train.labels, params, ForestMode::random_forest);

    std::size_t hits = 0;
    for (std::size_t r = 0; r < test.n_rows(); ++r) {
        const auto p = forest.predict_row(test.features.row_ptr(r));
        hits += (p[1] >= p[0] ? 1 : 0) == test.labels[r];
    }
    CHECK(static_cast<double>(hits) / static_cast<double>(test.n_rows()) >= 0.95);
}

TEST_CASE("gbt: training log-loss is non-increasing") {
    for (std::uint64_t seed : {1ULL, 2ULL}) {
        const Dataset ds = testutil::make_binary_signal(300, 10, 5, seed);
        GbtParams params;
        params.n_rounds = 40;
        params.learning_rate = 0.1;
        const GbtModel model = train_gbt(ds.features, ds.labels, params);
        REQUIRE(model.logloss_trace.size() == 40);
        for (std::size_t i = 1; i < model.logloss_trace.size(); ++i)
            CHECK(model.logloss_trace[i] <= model.logloss_trace[i - 1] + 1e-12);
    }
}

TEST_CASE("gbt: bin edges are strictly increasing") {
    Rng rng(61);
    Matrix x(500, 4);
    for (auto& v : x.data()) v = rng.uniform(-5.0, 5.0);
    std::vector<int> y(500);
    for (std::size_t r = 0; r < 500; ++r) y[r] = x(r, 0) > 0 ? 1 : 0;
    GbtParams params;
    params.n_rounds = 3;
    params.max_bins = 16;  // force quantile binning
    const GbtModel model = train_gbt(x, y, params);
    for (const auto& edges : model.bin_edges) {
        CHECK(!edges.empty());
        CHECK(edges.size() <= 15);
        for (std::size_t i = 1; i < edges.size(); ++i) CHECK(edges[i] > edges[i - 1]);
    }
}

TEST_CASE("gbt: one-round stump agrees with the CART root in sign") {
    const Dataset ds = testutil::make_dataset({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
    GbtParams params;
    params.n_rounds = 1;
    params.max_leaves = 2;
    params.learning_rate = 0.5;
    const GbtModel gbt = train_gbt(ds.features, ds.labels, params);
    const TreeModel cart = train_decision_tree(ds.features, ds.labels);

    // same side assignment: low x scores below high x
    const double lo = gbt.predict_logodds(ds.features.row_ptr(0));
    const double hi = gbt.predict_logodds(ds.features.row_ptr(3));
    CHECK(lo < hi);
    const auto cart_lo = cart.predict_row(ds.features.row_ptr(0));
    const auto cart_hi = cart.predict_row(ds.features.row_ptr(3));
    CHECK(cart_lo[1] < cart_hi[1]);
    REQUIRE(gbt.trees.size() == 1);
    CHECK(gbt.trees[0][0].threshold == 2.5);
}

TEST_CASE("gbt: vanishing learning rate stays at the initial log-odds") {
    const Dataset ds = testutil::make_binary_signal(100, 5, 2, 13);
    GbtParams params;
    params.n_rounds = 1;
    params.learning_rate = 1e-6;
    const GbtModel model = train_gbt(ds.features, ds.labels, params);
    const double base = sigmoid(model.init_logodds);
    for (std::size_t r = 0; r < 10; ++r) {
        const auto p = model.predict_row(ds.features.row_ptr(r));
        CHECK(std::abs(p[1] - base) < 1e-4);
    }
}

TEST_CASE("gbt: single-class data yields a constant clamped model") {
    const Dataset ds = testutil::make_dataset({{1}, {2}, {3}}, {1, 1, 1});
    GbtParams params;
    params.n_rounds = 5;
    const GbtModel model = train_gbt(ds.features, ds.labels, params);
    CHECK(model.trees.empty());
    CHECK(model.init_logodds == 10.0);
    const auto p = model.predict_row(ds.features.row_ptr(0));
    CHECK(p[1] > 0.9999);
}

TEST_CASE("gbt: parameter validation") {
    const Dataset ds = testutil::make_dataset({{1}, {2}}, {0, 1});
    GbtParams params;
    params.learning_rate = 0.0;
    CHECK_THROWS_AS(train_gbt(ds.features, ds.labels, params), ValueError);
    params.learning_rate = 0.1;
    params.n_rounds = 0;
    CHECK_THROWS_AS(train_gbt(ds.features, ds.labels, params), ValueError);
}

TEST_CASE("knn: k=1 memorizes unique training points") {
    const Dataset ds = testutil::make_blobs(20, 1.0, 5);
    KnnParams params;
    params.k = 1;
    const KnnModel model = train_knn(ds.features, ds.labels, params);
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        const auto p = model.predict_row(ds.features.row_ptr(r));
        CHECK((p[1] >= p[0] ? 1 : 0) == ds.labels[r]);
    }
}

TEST_CASE("knn: equidistant majority vote") {
    const Dataset ds = testutil::make_dataset(
        {{1, 0}, {0, 1}, {-1, 0}}, {0, 0, 1});
    KnnParams params;
    params.k = 3;
    const KnnModel model = train_knn(ds.features, ds.labels, params);
    const double query[2] = {0.0, 0.0};
    const auto p = model.predict_row(query);
    CHECK(p[0] == doctest::Approx(2.0 / 3.0));
    CHECK((p[1] >= p[0] ? 1 : 0) == 0);
}

TEST_CASE("knn: hamming equals euclidean ranking on binary data") {
    const Dataset ds = testutil::make_binary_signal(60, 8, 4, 3);
    KnnParams ham;
    ham.k = 7;
    ham.metric = KnnMetric::hamming;
    KnnParams euc = ham;
    euc.metric = KnnMetric::euclidean;
    const KnnModel m_ham = train_knn(ds.features, ds.labels, ham);
    const KnnModel m_euc = train_knn(ds.features, ds.labels, euc);
    for (std::size_t r = 0; r < 20; ++r)
        CHECK(m_ham.neighbors(ds.features.row_ptr(r)) ==
              m_euc.neighbors(ds.features.row_ptr(r)));
}

TEST_CASE("knn: k out of range rejected") {
    const Dataset ds = testutil::make_dataset({{1}, {2}}, {0, 1});
    KnnParams params;
    params.k = 3;
    CHECK_THROWS_AS(train_knn(ds.features, ds.labels, params), ValueError);
}

TEST_CASE("predict_proba: rows sum to one for every family") {
    const Dataset ds = testutil::make_binary_signal(60, 6, 3, 21);
    std::vector<MemberConfig> members = default_roster(3);
    for (auto& m : members) {
        if (m.family == ModelFamily::gbt) m.params["n_rounds"] = "10";
        if (m.family == ModelFamily::random_forest ||
            m.family == ModelFamily::extra_trees)
            m.params["n_trees"] = "10";
    }
    const ModelArtifact ensemble = train_voting_ensemble(ds, members, Voting::soft);
    const Matrix proba = predict_proba(ensemble, ds.features);
    for (std::size_t r = 0; r < proba.rows(); ++r) {
        CHECK(proba(r, 0) + proba(r, 1) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(proba(r, 0) >= 0.0);
        CHECK(proba(r, 1) <= 1.0);
    }

    Matrix wrong(2, 3);
    CHECK_THROWS_AS(predict_proba(ensemble, wrong), ValueError);
}

TEST_CASE("ensemble: two identical members reproduce the member") {
    EnsembleModel e;
    e.voting = Voting::soft;
    e.members.push_back(wrap_tree(leaf_model(0.3, 0.7), 2));
    e.members.push_back(wrap_tree(leaf_model(0.3, 0.7), 2));
    e.weights = {0.5, 0.5};
    ModelArtifact a;
    a.family = ModelFamily::ensemble;
    a.n_features = 2;
    a.model = e;
    const double x[2] = {0, 0};
    const auto p = a.predict_row(x);
    CHECK(p[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("ensemble: soft vote averages member probabilities") {
    EnsembleModel e;
    e.voting = Voting::soft;
    e.members.push_back(wrap_tree(leaf_model(0.9, 0.1), 2));
    e.members.push_back(wrap_tree(leaf_model(0.6, 0.4), 2));
    e.weights = {0.5, 0.5};
    ModelArtifact a;
    a.family = ModelFamily::ensemble;
    a.n_features = 2;
    a.model = e;
    const double x[2] = {1, 1};
    const auto p = a.predict_row(x);
    CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("ensemble: hard vote majority and the class-1 tie rule") {
    EnsembleModel e;
    e.voting = Voting::hard;
    e.members.push_back(wrap_tree(leaf_model(0.9, 0.1), 2));
    e.members.push_back(wrap_tree(leaf_model(0.2, 0.8), 2));
    e.members.push_back(wrap_tree(leaf_model(0.4, 0.6), 2));
    e.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    ModelArtifact a;
    a.family = ModelFamily::ensemble;
    a.n_features = 2;
    a.model = e;
    const double x[2] = {0, 1};
    const auto p = a.predict_row(x);
    CHECK(p[1] > p[0]);  // 2 of 3 vote malware

    // exact probability tie resolves to class 1
    const Matrix tie_proba = [] {
        Matrix m(1, 2);
        m(0, 0) = 0.5;
        m(0, 1) = 0.5;
        return m;
    }();
    CHECK(hard_labels(tie_proba) == std::vector<int>{1});
}

TEST_CASE("gbt constant model: log-odds zero ties to class 1") {
    GbtModel g;
    g.init_logodds = 0.0;
    g.n_features = 1;
    g.cat_encoding.assign(1, {});
    ModelArtifact a;
    a.family = ModelFamily::gbt;
    a.n_features = 1;
    a.model = g;
    const double x[1] = {0.0};
    const auto p = a.predict_row(x);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    Matrix proba(1, 2);
    proba(0, 0) = p[0];
    proba(0, 1) = p[1];
    CHECK(hard_labels(proba) == std::vector<int>{1});
}

TEST_CASE("train_voting_ensemble: failing member drops with a warning") {
    const Dataset ds = testutil::make_binary_signal(30, 4, 2, 9);
    std::vector<MemberConfig> members(3);
    members[0].family = ModelFamily::tree;
    members[0].name = "tree";
    members[1].family = ModelFamily::knn;
    members[1].name = "bad_knn";
    members[1].params = {{"k", "1000"}};  // k > rows
    members[2].family = ModelFamily::knn;
    members[2].name = "knn";
    members[2].params = {{"k", "3"}};

    std::vector<std::string> warnings;
    const ModelArtifact e = train_voting_ensemble(ds, members, Voting::soft, {}, &warnings);
    CHECK(std::get<EnsembleModel>(e.model).members.size() == 2);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("bad_knn") != std::string::npos);

    // fewer than two survivors is an error
    std::vector<MemberConfig> doomed(2);
    doomed[0] = members[1];
    doomed[1] = members[1];
    CHECK_THROWS_AS(train_voting_ensemble(ds, doomed, Voting::soft), Error);
}

TEST_CASE("model serialization: reload predicts bit-identically") {
    const Dataset ds = testutil::make_binary_signal(80, 6, 3, 101);
    std::vector<MemberConfig> members = default_roster(17);
    for (auto& m : members) {
        if (m.family == ModelFamily::gbt) m.params["n_rounds"] = "8";
        if (m.family == ModelFamily::random_forest ||
            m.family == ModelFamily::extra_trees)
            m.params["n_trees"] = "6";
    }
    const ModelArtifact original = train_voting_ensemble(ds, members, Voting::soft);
    const std::string text = model_to_string(original);
    const ModelArtifact reloaded = model_from_string(text);

    CHECK(model_to_string(reloaded) == text);
    const Matrix pa = predict_proba(original, ds.features);
    const Matrix pb = predict_proba(reloaded, ds.features);
    CHECK(pa == pb);
}
