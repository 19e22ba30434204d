#include "automal/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "automal/error.hpp"

namespace automal {

namespace {

const std::map<std::string, std::string>& default_values() {
    static const std::map<std::string, std::string> defaults = {
        {"dataset.path", ""},
        {"dataset.label", "class"},
        {"dataset.malware_label", ""},
        {"seed", "42"},
        {"threads", "0"},
        {"split.ratio", "0.8"},
        {"split.stratified", "on"},
        {"preprocess.impute", "median_mode"},
        {"preprocess.outliers", "off"},
        {"preprocess.iqr_k", "1.5"},
        {"preprocess.onehot", "off"},
        {"preprocess.dedupe", "on"},
        {"preprocess.balance", "off"},
        {"features.method", "lasso"},
        {"features.k", "32"},
        {"features.n_components", "16"},
        {"features.lambda", "auto"},
        {"features.tol", "1e-6"},
        {"features.max_iter", "10000"},
        {"features.threshold", "0"},
        {"models.roster", "tree,rf,extra,gbt_a,gbt_b,knn"},
        {"models.voting", "soft"},
        {"hpo.enable", "on"},
        {"hpo.n_trials", "50"},
        {"hpo.seed", ""},
        {"hpo.pruner", "off"},
        {"hpo.eta", "2"},
        {"hpo.rungs", "3"},
        {"hpo.objective", "recall"},
        {"hpo.min_mcc_guard", "0.05"},
        {"hpo.validation", "holdout"},
        {"hpo.kfolds", "5"},
        {"explain.enable", "on"},
        {"explain.repeats", "5"},
        {"explain.samples", "2000"},
        {"explain.instances", "5"},
        {"explain.background", "100"},
        {"tracking.root", "mhruns"},
        {"report.enable", "on"},
    };
    return defaults;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

void check_enum(const PipelineConfig& c, const std::string& key,
                const std::set<std::string>& allowed) {
    if (!allowed.count(c.get(key))) {
        std::string opts;
        for (const auto& o : allowed) opts += (opts.empty() ? "" : "|") + o;
        throw ValueError("config: " + key + " must be one of {" + opts + "}, got '" +
                         c.get(key) + "'");
    }
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig c;
    c.values_ = default_values();
    return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    PipelineConfig c = defaults();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValueError("config: line " + std::to_string(line_no) +
                             ": expected 'key = value'");
        c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

PipelineConfig PipelineConfig::from_snapshot_json(const std::string& json_text) {
    PipelineConfig c = defaults();
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& [k, v] : j.items()) c.set(k, v.get<std::string>());
    return c;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
    if (!default_values().count(key))
        throw ValueError("config: unknown key '" + key + "'");
    values_[key] = value;
}

const std::string& PipelineConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValueError("config: unknown key '" + key + "'");
    return it->second;
}

bool PipelineConfig::get_flag(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "on") return true;
    if (v == "off") return false;
    throw ValueError("config: " + key + " must be on or off, got '" + v + "'");
}

long long PipelineConfig::get_int(const std::string& key) const {
    try {
        return std::stoll(get(key));
    } catch (const std::exception&) {
        throw ValueError("config: " + key + " must be an integer, got '" + get(key) + "'");
    }
}

double PipelineConfig::get_real(const std::string& key) const {
    try {
        return std::stod(get(key));
    } catch (const std::exception&) {
        throw ValueError("config: " + key + " must be a number, got '" + get(key) + "'");
    }
}

std::string PipelineConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j.dump();
}

void PipelineConfig::validate() const {
    const double ratio = get_real("split.ratio");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ValueError("config: split.ratio must lie in (0,1)");
    check_enum(*this, "split.stratified", {"on", "off"});
    check_enum(*this, "preprocess.impute", {"median_mode"});
    check_enum(*this, "preprocess.outliers", {"off", "iqr"});
    check_enum(*this, "preprocess.onehot", {"on", "off"});
    check_enum(*this, "preprocess.dedupe", {"on", "off"});
    check_enum(*this, "preprocess.balance", {"off", "unique_undersample"});
    check_enum(*this, "features.method", {"lasso", "anova", "pca", "none"});
    check_enum(*this, "models.voting", {"soft", "hard"});
    check_enum(*this, "hpo.enable", {"on", "off"});
    check_enum(*this, "hpo.pruner", {"off", "halving"});
    check_enum(*this, "hpo.objective", {"recall"});  // the fixed study objective
    check_enum(*this, "hpo.validation", {"holdout", "kfold"});
    check_enum(*this, "explain.enable", {"on", "off"});
    check_enum(*this, "report.enable", {"on", "off"});

    if (get("features.lambda") != "auto" && get_real("features.lambda") < 0.0)
        throw ValueError("config: features.lambda must be 'auto' or >= 0");
    if (get_int("hpo.n_trials") < 1)
        throw ValueError("config: hpo.n_trials must be at least 1");
    if (get_int("explain.background") < 1)
        throw ValueError("config: explain.background must be at least 1");

    static const std::set<std::string> known_members = {"tree", "rf",    "extra",
                                                        "gbt_a", "gbt_b", "knn"};
    std::istringstream roster(get("models.roster"));
    std::string member;
    std::size_t count = 0;
    while (std::getline(roster, member, ',')) {
        if (!known_members.count(member))
            throw ValueError("config: unknown roster member '" + member + "'");
        ++count;
    }
    if (count < 2) throw ValueError("config: models.roster needs at least 2 members");
}

}  // namespace automal
