#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "automal/forest.hpp"
#include "automal/gbt.hpp"
#include "automal/knn.hpp"
#include "automal/tree.hpp"

namespace automal {

enum class Voting { soft, hard };

struct ModelArtifact;

// Weighted combiner over trained members. Weights are positive and
// normalized to sum 1; soft voting averages member probabilities, hard
// voting tallies member labels. Exact probability ties resolve to class 1.
struct EnsembleModel {
    std::vector<ModelArtifact> members;
    std::vector<double> weights;
    Voting voting = Voting::soft;
};

enum class ModelFamily { tree, random_forest, extra_trees, gbt, knn, ensemble };

const char* to_string(ModelFamily f);
ModelFamily model_family_from_string(const std::string& s);

// A trained classifier plus its hyperparameters and provenance, the unit
// the run store and the HPO stage pass around.
struct ModelArtifact {
    ModelFamily family = ModelFamily::tree;
    std::variant<TreeModel, ForestModel, GbtModel, KnnModel, EnsembleModel> model;
    std::map<std::string, std::string> hyperparams;
    std::size_t n_features = 0;

    std::array<double, 2> predict_row(const double* x) const;
};

// Class-probability pairs for every row; each pair sums to 1 within 1e-9.
// Rows evaluate in parallel into independent slots.
Matrix predict_proba(const ModelArtifact& model, const Matrix& x);

// argmax with class 1 (malware) preferred on an exact tie.
std::vector<int> hard_labels(const Matrix& proba);
std::vector<int> predict_labels(const ModelArtifact& model, const Matrix& x);
std::vector<double> predict_scores(const ModelArtifact& model, const Matrix& x);  // P(class 1)

// Versioned, self-describing text container; doubles are stored as hex
// floats so a reloaded model predicts bit-identically.
void save_model(const ModelArtifact& model, const std::string& path);
ModelArtifact load_model(const std::string& path);
std::string model_to_string(const ModelArtifact& model);
ModelArtifact model_from_string(const std::string& text);

}  // namespace automal
