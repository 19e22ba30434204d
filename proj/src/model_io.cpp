#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "automal/model.hpp"

// Text container, format "automal-model v1". One record per line, doubles
// as C hex floats so reload is bit-exact. Nested ensembles embed member
// records recursively.

namespace automal {

namespace {

std::string hexd(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hexd(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw IoError("model parse: bad number '" + s + "'");
    return v;
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-empty line split into whitespace tokens.
    std::vector<std::string> next(const char* expect = nullptr) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::vector<std::string> tok;
            std::string t;
            while (ss >> t) tok.push_back(t);
            if (tok.empty()) continue;
            if (expect && tok[0] != expect)
                throw IoError("model parse: line " + std::to_string(line_no_) +
                              ": expected '" + expect + "', got '" + tok[0] + "'");
            return tok;
        }
        throw IoError("model parse: unexpected end of input");
    }

    std::string raw_line() {
        std::string line;
        if (!std::getline(in_, line)) throw IoError("model parse: unexpected end of input");
        ++line_no_;
        return line;
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

void write_tree(std::ostream& out, const TreeModel& t) {
    out << "tree " << t.n_features << ' ' << t.train_rows << ' ' << t.params.max_depth
        << ' ' << t.params.min_samples_leaf << ' ' << t.nodes.size() << '\n';
    for (const auto& n : t.nodes)
        out << "node " << n.feature << ' ' << hexd(n.threshold) << ' ' << n.left << ' '
            << n.right << ' ' << hexd(n.prob[0]) << ' ' << hexd(n.prob[1]) << ' '
            << n.n_samples << '\n';
}

TreeModel read_tree(LineReader& r) {
    auto head = r.next("tree");
    if (head.size() != 6) throw IoError("model parse: malformed tree header");
    TreeModel t;
    t.n_features = std::stoull(head[1]);
    t.train_rows = std::stoull(head[2]);
    t.params.max_depth = std::stoi(head[3]);
    t.params.min_samples_leaf = std::stoi(head[4]);
    const std::size_t n_nodes = std::stoull(head[5]);
    t.nodes.resize(n_nodes);
    for (auto& n : t.nodes) {
        auto tok = r.next("node");
        if (tok.size() != 8) throw IoError("model parse: malformed tree node");
        n.feature = std::stoi(tok[1]);
        n.threshold = parse_hexd(tok[2]);
        n.left = std::stoi(tok[3]);
        n.right = std::stoi(tok[4]);
        n.prob[0] = parse_hexd(tok[5]);
        n.prob[1] = parse_hexd(tok[6]);
        n.n_samples = static_cast<std::uint32_t>(std::stoul(tok[7]));
    }
    return t;
}

void write_forest(std::ostream& out, const ForestModel& f) {
    out << "forest " << (f.mode == ForestMode::random_forest ? "rf" : "extra") << ' '
        << f.n_features << ' ' << f.mtry << ' ' << f.trees.size() << ' '
        << f.params.seed << ' ' << f.params.max_depth << ' ' << f.params.min_samples_leaf
        << ' ' << static_cast<int>(f.params.features_per_split) << ' '
        << (f.params.bootstrap ? 1 : 0) << '\n';
    out << "seeds";
    for (auto s : f.tree_seeds) out << ' ' << s;
    out << '\n';
    for (const auto& t : f.trees) write_tree(out, t);
}

ForestModel read_forest(LineReader& r) {
    auto head = r.next("forest");
    if (head.size() != 10) throw IoError("model parse: malformed forest header");
    ForestModel f;
    f.mode = head[1] == "rf" ? ForestMode::random_forest : ForestMode::extra_trees;
    f.n_features = std::stoull(head[2]);
    f.mtry = std::stoi(head[3]);
    const std::size_t n_trees = std::stoull(head[4]);
    f.params.seed = std::stoull(head[5]);
    f.params.max_depth = std::stoi(head[6]);
    f.params.min_samples_leaf = std::stoi(head[7]);
    f.params.features_per_split = static_cast<FeatureSubset>(std::stoi(head[8]));
    f.params.bootstrap = head[9] == "1";
    f.params.n_trees = static_cast<int>(n_trees);
    auto seeds = r.next("seeds");
    if (seeds.size() != n_trees + 1) throw IoError("model parse: malformed forest seeds");
    for (std::size_t i = 0; i < n_trees; ++i) f.tree_seeds.push_back(std::stoull(seeds[i + 1]));
    f.trees.reserve(n_trees);
    for (std::size_t i = 0; i < n_trees; ++i) f.trees.push_back(read_tree(r));
    return f;
}

void write_gbt(std::ostream& out, const GbtModel& g) {
    out << "gbt " << g.n_features << ' ' << hexd(g.init_logodds) << ' '
        << hexd(g.cat_prior) << ' ' << g.params.n_rounds << ' '
        << hexd(g.params.learning_rate) << ' ' << g.params.max_leaves << ' '
        << g.params.max_depth << ' ' << g.params.max_bins << ' ' << hexd(g.params.l2)
        << ' ' << hexd(g.params.min_child_hessian) << ' '
        << (g.params.growth == GbtGrowth::leaf_wise ? "leaf" : "depth") << ' '
        << (g.params.categorical_smoothing ? 1 : 0) << ' '
        << hexd(g.params.smoothing_strength) << ' ' << g.trees.size() << '\n';
    for (std::size_t c = 0; c < g.bin_edges.size(); ++c) {
        out << "edges " << c << ' ' << g.bin_edges[c].size();
        for (double e : g.bin_edges[c]) out << ' ' << hexd(e);
        out << '\n';
    }
    for (std::size_t c = 0; c < g.cat_encoding.size(); ++c) {
        if (g.cat_encoding[c].empty()) continue;
        out << "catenc " << c << ' ' << g.cat_encoding[c].size();
        for (double v : g.cat_encoding[c]) out << ' ' << hexd(v);
        out << '\n';
    }
    out << "catend\n";
    for (const auto& tree : g.trees) {
        out << "gtree " << tree.size() << '\n';
        for (const auto& n : tree)
            out << "gnode " << n.feature << ' ' << hexd(n.threshold) << ' ' << n.left
                << ' ' << n.right << ' ' << hexd(n.value) << '\n';
    }
    out << "trace " << g.logloss_trace.size();
    for (double v : g.logloss_trace) out << ' ' << hexd(v);
    out << '\n';
}

GbtModel read_gbt(LineReader& r) {
    auto head = r.next("gbt");
    if (head.size() != 15) throw IoError("model parse: malformed gbt header");
    GbtModel g;
    g.n_features = std::stoull(head[1]);
    g.init_logodds = parse_hexd(head[2]);
    g.cat_prior = parse_hexd(head[3]);
    g.params.n_rounds = std::stoi(head[4]);
    g.params.learning_rate = parse_hexd(head[5]);
    g.params.max_leaves = std::stoi(head[6]);
    g.params.max_depth = std::stoi(head[7]);
    g.params.max_bins = std::stoi(head[8]);
    g.params.l2 = parse_hexd(head[9]);
    g.params.min_child_hessian = parse_hexd(head[10]);
    g.params.growth = head[11] == "leaf" ? GbtGrowth::leaf_wise : GbtGrowth::depth_wise;
    g.params.categorical_smoothing = head[12] == "1";
    g.params.smoothing_strength = parse_hexd(head[13]);
    const std::size_t n_trees = std::stoull(head[14]);

    g.bin_edges.assign(g.n_features, {});
    g.cat_encoding.assign(g.n_features, {});
    for (std::size_t c = 0; c < g.n_features; ++c) {
        auto tok = r.next("edges");
        const auto col = std::stoull(tok[1]);
        const auto count = std::stoull(tok[2]);
        if (tok.size() != count + 3) throw IoError("model parse: malformed edges");
        for (std::size_t i = 0; i < count; ++i)
            g.bin_edges[col].push_back(parse_hexd(tok[i + 3]));
    }
    for (;;) {
        auto tok = r.next();
        if (tok[0] == "catend") break;
        if (tok[0] != "catenc") throw IoError("model parse: expected catenc/catend");
        const auto col = std::stoull(tok[1]);
        const auto count = std::stoull(tok[2]);
        if (tok.size() != count + 3) throw IoError("model parse: malformed catenc");
        for (std::size_t i = 0; i < count; ++i)
            g.cat_encoding[col].push_back(parse_hexd(tok[i + 3]));
    }
    for (std::size_t t = 0; t < n_trees; ++t) {
        auto tok = r.next("gtree");
        std::vector<GbtNode> tree(std::stoull(tok[1]));
        for (auto& n : tree) {
            auto nt = r.next("gnode");
            if (nt.size() != 6) throw IoError("model parse: malformed gnode");
            n.feature = std::stoi(nt[1]);
            n.threshold = parse_hexd(nt[2]);
            n.left = std::stoi(nt[3]);
            n.right = std::stoi(nt[4]);
            n.value = parse_hexd(nt[5]);
        }
        g.trees.push_back(std::move(tree));
    }
    auto trace = r.next("trace");
    const auto count = std::stoull(trace[1]);
    for (std::size_t i = 0; i < count; ++i)
        g.logloss_trace.push_back(parse_hexd(trace[i + 2]));
    return g;
}

void write_knn(std::ostream& out, const KnnModel& k) {
    out << "knn " << k.params.k << ' '
        << (k.params.metric == KnnMetric::euclidean ? "euclidean" : "hamming") << ' '
        << k.train_features.rows() << ' ' << k.train_features.cols() << '\n';
    for (std::size_t r = 0; r < k.train_features.rows(); ++r) {
        out << "krow " << k.train_labels[r];
        for (std::size_t c = 0; c < k.train_features.cols(); ++c)
            out << ' ' << hexd(k.train_features(r, c));
        out << '\n';
    }
}

KnnModel read_knn(LineReader& r) {
    auto head = r.next("knn");
    if (head.size() != 5) throw IoError("model parse: malformed knn header");
    KnnModel k;
    k.params.k = std::stoi(head[1]);
    k.params.metric = head[2] == "euclidean" ? KnnMetric::euclidean : KnnMetric::hamming;
    const std::size_t rows = std::stoull(head[3]);
    const std::size_t cols = std::stoull(head[4]);
    k.train_features = Matrix(rows, cols);
    k.train_labels.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        auto tok = r.next("krow");
        if (tok.size() != cols + 2) throw IoError("model parse: malformed knn row");
        k.train_labels[i] = std::stoi(tok[1]);
        for (std::size_t c = 0; c < cols; ++c)
            k.train_features(i, c) = parse_hexd(tok[c + 2]);
    }
    return k;
}

void write_artifact(std::ostream& out, const ModelArtifact& a);

void write_ensemble(std::ostream& out, const EnsembleModel& e) {
    out << "ensemble " << (e.voting == Voting::soft ? "soft" : "hard") << ' '
        << e.members.size() << '\n';
    out << "weights";
    for (double w : e.weights) out << ' ' << hexd(w);
    out << '\n';
    for (const auto& m : e.members) write_artifact(out, m);
}

ModelArtifact read_artifact(LineReader& r);

EnsembleModel read_ensemble(LineReader& r) {
    auto head = r.next("ensemble");
    if (head.size() != 3) throw IoError("model parse: malformed ensemble header");
    EnsembleModel e;
    e.voting = head[1] == "soft" ? Voting::soft : Voting::hard;
    const std::size_t n = std::stoull(head[2]);
    auto weights = r.next("weights");
    if (weights.size() != n + 1) throw IoError("model parse: malformed ensemble weights");
    for (std::size_t i = 0; i < n; ++i) e.weights.push_back(parse_hexd(weights[i + 1]));
    for (std::size_t i = 0; i < n; ++i) e.members.push_back(read_artifact(r));
    return e;
}

void write_artifact(std::ostream& out, const ModelArtifact& a) {
    out << "artifact " << to_string(a.family) << ' ' << a.n_features << ' '
        << a.hyperparams.size() << '\n';
    for (const auto& [k, v] : a.hyperparams) out << "hp " << k << '\t' << v << '\n';
    std::visit([&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TreeModel>) write_tree(out, m);
        else if constexpr (std::is_same_v<T, ForestModel>) write_forest(out, m);
        else if constexpr (std::is_same_v<T, GbtModel>) write_gbt(out, m);
        else if constexpr (std::is_same_v<T, KnnModel>) write_knn(out, m);
        else write_ensemble(out, m);
    }, a.model);
}

ModelArtifact read_artifact(LineReader& r) {
    auto head = r.next("artifact");
    if (head.size() != 4) throw IoError("model parse: malformed artifact header");
    ModelArtifact a;
    a.family = model_family_from_string(head[1]);
    a.n_features = std::stoull(head[2]);
    const std::size_t n_hp = std::stoull(head[3]);
    for (std::size_t i = 0; i < n_hp; ++i) {
        std::string line = r.raw_line();
        if (line.rfind("hp ", 0) != 0) throw IoError("model parse: expected hp line");
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw IoError("model parse: malformed hp line");
        a.hyperparams[line.substr(3, tab - 3)] = line.substr(tab + 1);
    }
    switch (a.family) {
        case ModelFamily::tree: a.model = read_tree(r); break;
        case ModelFamily::random_forest:
        case ModelFamily::extra_trees: a.model = read_forest(r); break;
        case ModelFamily::gbt: a.model = read_gbt(r); break;
        case ModelFamily::knn: a.model = read_knn(r); break;
        case ModelFamily::ensemble: a.model = read_ensemble(r); break;
    }
    return a;
}

}  // namespace

std::string model_to_string(const ModelArtifact& model) {
    std::ostringstream out;
    out << "automal-model v1\n";
    write_artifact(out, model);
    out << "end\n";
    return out.str();
}

ModelArtifact model_from_string(const std::string& text) {
    std::istringstream in(text);
    LineReader r(in);
    auto magic = r.next();
    if (magic.size() != 2 || magic[0] != "automal-model" || magic[1] != "v1")
        throw IoError("model parse: bad magic line");
    ModelArtifact a = read_artifact(r);
    r.next("end");
    return a;
}

void save_model(const ModelArtifact& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_model: cannot open '" + path + "'");
    out << model_to_string(model);
    if (!out) throw IoError("save_model: write failure on '" + path + "'");
}

ModelArtifact load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_model: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_string(buf.str());
}

}  // namespace automal
