#include "automal/trainers.hpp"

#include <set>

#include "automal/rng.hpp"

namespace automal {

namespace {

int param_int(const std::map<std::string, std::string>& m, const std::string& key,
              int fallback) {
    auto it = m.find(key);
    return it == m.end() ? fallback : std::stoi(it->second);
}

double param_real(const std::map<std::string, std::string>& m, const std::string& key,
                  double fallback) {
    auto it = m.find(key);
    return it == m.end() ? fallback : std::stod(it->second);
}

std::string param_str(const std::map<std::string, std::string>& m, const std::string& key,
                      const std::string& fallback) {
    auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

std::uint64_t param_seed(const std::map<std::string, std::string>& m) {
    auto it = m.find("seed");
    return it == m.end() ? 0 : std::stoull(it->second);
}

void reject_unknown(const std::map<std::string, std::string>& m,
                    const std::set<std::string>& known, const char* family) {
    for (const auto& [k, v] : m)
        if (!known.count(k))
            throw ValueError(std::string("train_model: unknown ") + family +
                             " parameter '" + k + "'");
}

FeatureSubset subset_from_string(const std::string& s) {
    if (s == "sqrt") return FeatureSubset::sqrt;
    if (s == "log2") return FeatureSubset::log2;
    if (s == "all") return FeatureSubset::all;
    throw ValueError("train_model: unknown features_per_split '" + s + "'");
}

}  // namespace

ModelArtifact train_model(const Dataset& ds, const MemberConfig& config) {
    ModelArtifact artifact;
    artifact.family = config.family;
    artifact.hyperparams = config.params;
    if (!config.name.empty()) artifact.hyperparams["member"] = config.name;
    artifact.n_features = ds.n_cols();

    switch (config.family) {
        case ModelFamily::tree: {
            reject_unknown(config.params, {"max_depth", "min_samples_leaf"}, "tree");
            TreeParams p;
            p.max_depth = param_int(config.params, "max_depth", 64);
            p.min_samples_leaf = param_int(config.params, "min_samples_leaf", 1);
            artifact.model = train_decision_tree(ds.features, ds.labels, p);
            break;
        }
        case ModelFamily::random_forest:
        case ModelFamily::extra_trees: {
            reject_unknown(config.params,
                           {"n_trees", "max_depth", "min_samples_leaf",
                            "features_per_split", "bootstrap", "seed"},
                           "forest");
            ForestParams p;
            p.n_trees = param_int(config.params, "n_trees", 100);
            p.max_depth = param_int(config.params, "max_depth", 24);
            p.min_samples_leaf = param_int(config.params, "min_samples_leaf", 1);
            p.features_per_split =
                subset_from_string(param_str(config.params, "features_per_split", "sqrt"));
            p.seed = param_seed(config.params);
            const auto mode = config.family == ModelFamily::random_forest
                                  ? ForestMode::random_forest
                                  : ForestMode::extra_trees;
            p.bootstrap = param_str(config.params, "bootstrap",
                                    mode == ForestMode::random_forest ? "on" : "off") == "on";
            artifact.model = train_forest(ds.features, ds.labels, p, mode);
            break;
        }
        case ModelFamily::gbt: {
            reject_unknown(config.params,
                           {"n_rounds", "learning_rate", "max_leaves", "max_depth",
                            "growth", "categorical_smoothing", "max_bins", "seed"},
                           "gbt");
            GbtParams p;
            p.n_rounds = param_int(config.params, "n_rounds", 200);
            p.learning_rate = param_real(config.params, "learning_rate", 0.1);
            p.max_leaves = param_int(config.params, "max_leaves", 31);
            p.max_depth = param_int(config.params, "max_depth", 6);
            p.max_bins = param_int(config.params, "max_bins", 255);
            p.growth = param_str(config.params, "growth", "leaf") == "depth"
                           ? GbtGrowth::depth_wise
                           : GbtGrowth::leaf_wise;
            p.categorical_smoothing =
                param_str(config.params, "categorical_smoothing", "off") == "on";
            artifact.model = train_gbt(ds.features, ds.labels, p, ds.feature_kinds);
            break;
        }
        case ModelFamily::knn: {
            reject_unknown(config.params, {"k", "metric"}, "knn");
            KnnParams p;
            p.k = param_int(config.params, "k", 5);
            p.metric = param_str(config.params, "metric", "euclidean") == "hamming"
                           ? KnnMetric::hamming
                           : KnnMetric::euclidean;
            artifact.model = train_knn(ds.features, ds.labels, p);
            break;
        }
        case ModelFamily::ensemble:
            throw ValueError("train_model: use train_voting_ensemble for ensembles");
    }
    return artifact;
}

ModelArtifact train_voting_ensemble(const Dataset& ds,
                                    const std::vector<MemberConfig>& members,
                                    Voting voting, std::vector<double> weights,
                                    std::vector<std::string>* warnings) {
    if (members.size() < 2)
        throw ValueError("train_voting_ensemble: need at least 2 member configs");
    if (!weights.empty() && weights.size() != members.size())
        throw ValueError("train_voting_ensemble: weight count mismatch");

    EnsembleModel ensemble;
    ensemble.voting = voting;
    std::vector<double> kept_weights;
    for (std::size_t m = 0; m < members.size(); ++m) {
        try {
            ensemble.members.push_back(train_model(ds, members[m]));
            kept_weights.push_back(weights.empty() ? 1.0 : weights[m]);
        } catch (const std::exception& e) {
            if (warnings)
                warnings->push_back("member '" +
                                    (members[m].name.empty() ? to_string(members[m].family)
                                                             : members[m].name) +
                                    "' dropped: " + e.what());
        }
    }
    if (ensemble.members.size() < 2)
        throw Error("train_voting_ensemble: fewer than 2 members trained successfully");

    double total = 0.0;
    for (double w : kept_weights) {
        if (w <= 0.0) throw ValueError("train_voting_ensemble: weights must be positive");
        total += w;
    }
    for (double& w : kept_weights) w /= total;
    ensemble.weights = std::move(kept_weights);

    ModelArtifact artifact;
    artifact.family = ModelFamily::ensemble;
    artifact.n_features = ds.n_cols();
    artifact.hyperparams["voting"] = voting == Voting::soft ? "soft" : "hard";
    artifact.hyperparams["members"] = std::to_string(ensemble.members.size());
    artifact.model = std::move(ensemble);
    return artifact;
}

std::vector<MemberConfig> default_roster(std::uint64_t seed) {
    std::vector<MemberConfig> roster(6);
    roster[0].family = ModelFamily::tree;
    roster[0].name = "tree";
    roster[0].params = {{"max_depth", "20"}};

    roster[1].family = ModelFamily::random_forest;
    roster[1].name = "rf";
    roster[1].params = {{"n_trees", "100"},
                        {"seed", std::to_string(derive_seed(seed, 1))}};

    roster[2].family = ModelFamily::extra_trees;
    roster[2].name = "extra";
    roster[2].params = {{"n_trees", "100"},
                        {"seed", std::to_string(derive_seed(seed, 2))}};

    roster[3].family = ModelFamily::gbt;
    roster[3].name = "gbt_a";
    roster[3].params = {{"growth", "leaf"}, {"max_leaves", "31"}};

    roster[4].family = ModelFamily::gbt;
    roster[4].name = "gbt_b";
    roster[4].params = {{"growth", "depth"},
                        {"max_depth", "6"},
                        {"categorical_smoothing", "on"}};

    roster[5].family = ModelFamily::knn;
    roster[5].name = "knn";
    roster[5].params = {{"k", "5"}};
    return roster;
}

}  // namespace automal
