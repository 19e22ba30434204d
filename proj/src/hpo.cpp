#include "automal/hpo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "automal/metrics.hpp"
#include "automal/rng.hpp"

namespace automal {

SearchSpace default_space(ModelFamily family) {
    SearchSpace space;
    space.family = family;
    switch (family) {
        case ModelFamily::tree:
            space.params = {{"max_depth", IntRange{2, 20, 1}},
                            {"min_samples_leaf", IntRange{1, 50, 1}}};
            break;
        case ModelFamily::random_forest:
        case ModelFamily::extra_trees:
            space.params = {{"n_trees", IntRange{50, 400, 1}},
                            {"features_per_split", Categorical{{"sqrt", "log2", "all"}}},
                            {"max_depth", IntRange{4, 24, 1}}};
            space.budget_param = "n_trees";
            break;
        case ModelFamily::gbt:
            space.params = {{"n_rounds", IntRange{50, 500, 1}},
                            {"learning_rate", RealRange{0.01, 0.3, true}},
                            {"max_leaves", IntRange{15, 127, 1}}};
            space.budget_param = "n_rounds";
            break;
        case ModelFamily::knn:
            space.params = {{"k", IntRange{1, 25, 2}},
                            {"metric", Categorical{{"euclidean", "hamming"}}}};
            break;
        case ModelFamily::ensemble:
            throw ValueError("default_space: no search space for the ensemble itself");
    }
    return space;
}

std::map<std::string, std::string> sample_params(const SearchSpace& space,
                                                 std::uint64_t seed) {
    Rng rng(seed);
    std::map<std::string, std::string> out;
    for (const auto& spec : space.params) {
        if (const auto* ir = std::get_if<IntRange>(&spec.domain)) {
            if (ir->hi < ir->lo) throw ValueError("sample_params: empty integer range");
            const long long steps = (ir->hi - ir->lo) / ir->step;
            const long long v = ir->lo + rng.uniform_int(0, steps) * ir->step;
            out[spec.name] = std::to_string(v);
        } else if (const auto* rr = std::get_if<RealRange>(&spec.domain)) {
            if (!(rr->hi >= rr->lo)) throw ValueError("sample_params: empty real range");
            if (rr->log_scale && rr->lo <= 0.0)
                throw ValueError("sample_params: log-scale range must be positive");
            const double v =
                rr->log_scale ? rng.log_uniform(rr->lo, rr->hi) : rng.uniform(rr->lo, rr->hi);
            std::ostringstream ss;
            ss.precision(17);
            ss << v;
            out[spec.name] = ss.str();
        } else {
            const auto& cat = std::get<Categorical>(spec.domain);
            if (cat.choices.empty()) throw ValueError("sample_params: empty categorical");
            out[spec.name] =
                cat.choices[static_cast<std::size_t>(rng.below(cat.choices.size()))];
        }
    }
    return out;
}

std::vector<std::pair<long long, double>> halving_schedule(long long max_budget, int eta,
                                                           int rungs) {
    if (eta < 2) throw ValueError("halving_schedule: eta must be at least 2");
    if (rungs < 1) throw ValueError("halving_schedule: rungs must be at least 1");
    if (max_budget < 1) throw ValueError("halving_schedule: max_budget must be positive");
    std::vector<std::pair<long long, double>> out;
    for (int r = 0; r < rungs; ++r) {
        double divisor = std::pow(static_cast<double>(eta), rungs - 1 - r);
        auto budget = static_cast<long long>(
            std::llround(static_cast<double>(max_budget) / divisor));
        out.emplace_back(std::max<long long>(1, budget), 1.0 / eta);
    }
    return out;
}

namespace {

struct EvalResult {
    double recall = 0.0;
    double mcc = 0.0;
};

EvalResult evaluate_config(const Dataset& ds, const MemberConfig& config,
                           const Validation& validation) {
    auto eval_split = [&](const std::vector<std::size_t>& train_rows,
                          const std::vector<std::size_t>& val_rows) {
        const Dataset train = ds.subset_rows(train_rows);
        const Dataset val = ds.subset_rows(val_rows);
        ModelArtifact model = train_model(train, config);
        const auto labels = predict_labels(model, val.features);
        const MetricSet m = classification_metrics(confusion(val.labels, labels));
        return EvalResult{m.recall, m.mcc};
    };

    if (const auto* split = std::get_if<SplitPlan>(&validation))
        return eval_split(split->train_indices, split->test_indices);

    const auto& folds = std::get<FoldPlan>(validation);
    EvalResult acc;
    for (int f = 0; f < folds.k; ++f) {
        const EvalResult r = eval_split(folds.complement_rows(f), folds.fold_rows(f));
        acc.recall += r.recall;
        acc.mcc += r.mcc;
    }
    acc.recall /= folds.k;
    acc.mcc /= folds.k;
    return acc;
}

bool better_trial(const Trial& a, const Trial& b) {
    if (a.objective != b.objective) return a.objective > b.objective;
    if (a.secondary != b.secondary) return a.secondary > b.secondary;
    return a.id < b.id;
}

}  // namespace

const Trial& StudyResult::best() const {
    if (best_trial_id < 0) throw Error("StudyResult: no best trial");
    for (const auto& t : trials)
        if (t.id == best_trial_id) return t;
    throw Error("StudyResult: best trial id not found");
}

StudyResult optimize(const Dataset& ds, const SearchSpace& space,
                     const Validation& validation, const OptimizeOptions& options,
                     const MemberConfig& base_config,
                     const std::function<void(const Trial&)>& on_trial) {
    if (options.n_trials < 1) throw ValueError("optimize: n_trials must be at least 1");
    const auto t_start = std::chrono::steady_clock::now();

    StudyResult study;
    study.seed = options.seed;

    // Rung schedule only applies when the family has a budget knob.
    std::vector<std::pair<long long, double>> schedule;
    long long full_budget = 0;
    if (options.pruner && !space.budget_param.empty()) {
        for (const auto& spec : space.params) {
            if (spec.name != space.budget_param) continue;
            full_budget = std::get<IntRange>(spec.domain).hi;
        }
        schedule = halving_schedule(full_budget, options.eta, options.rungs);
    }
    // Scores seen per rung, in trial order, for the median rule.
    std::vector<std::vector<double>> rung_scores(schedule.size());

    for (int id = 0; id < options.n_trials; ++id) {
        Trial trial;
        trial.id = id;
        trial.params = sample_params(space, derive_seed(options.seed, static_cast<std::uint64_t>(id)));

        MemberConfig config = base_config;
        config.family = space.family;
        for (const auto& [k, v] : trial.params) config.params[k] = v;
        // Derived per-trial seed keeps randomized trainers deterministic.
        config.params["seed"] = std::to_string(
            derive_seed(options.seed, 0x7151a1 + static_cast<std::uint64_t>(id)));
        if (config.family == ModelFamily::tree || config.family == ModelFamily::knn)
            config.params.erase("seed");

        try {
            if (schedule.empty()) {
                const EvalResult r = evaluate_config(ds, config, validation);
                trial.objective = r.recall;
                trial.secondary = r.mcc;
                if (auto it = trial.params.find(space.budget_param);
                    it != trial.params.end())
                    trial.budget_consumed = std::stoll(it->second);
                trial.status = TrialStatus::complete;
            } else {
                const long long sampled_budget = std::stoll(trial.params.at(space.budget_param));
                bool pruned = false;
                for (std::size_t rung = 0; rung < schedule.size(); ++rung) {
                    const long long budget =
                        std::min(schedule[rung].first, sampled_budget);
                    config.params[space.budget_param] = std::to_string(budget);
                    const EvalResult r = evaluate_config(ds, config, validation);
                    trial.objective = r.recall;
                    trial.secondary = r.mcc;
                    // Budget = rounds/trees of the largest model trained, so
                    // a pruned trial never outspends its unpruned twin.
                    trial.budget_consumed = budget;
                    auto& seen = rung_scores[rung];
                    // Median of earlier trials at this rung; first visitor
                    // always survives, and a trial with no training left to
                    // skip counts as complete rather than pruned.
                    if (!seen.empty() && rung + 1 < schedule.size() &&
                        budget < sampled_budget) {
                        std::vector<double> sorted = seen;
                        std::sort(sorted.begin(), sorted.end());
                        const std::size_t mid = sorted.size() / 2;
                        const double median = sorted.size() % 2 == 1
                                                  ? sorted[mid]
                                                  : 0.5 * (sorted[mid - 1] + sorted[mid]);
                        if (trial.objective < median) {
                            seen.push_back(trial.objective);
                            pruned = true;
                            break;
                        }
                    }
                    seen.push_back(trial.objective);
                    if (budget >= sampled_budget) break;  // nothing left to grow
                }
                trial.status = pruned ? TrialStatus::pruned : TrialStatus::complete;
            }
        } catch (const std::exception& e) {
            trial.status = TrialStatus::failed;
            trial.error = e.what();
        }

        if (trial.status == TrialStatus::complete && options.min_mcc_guard >= 0.0 &&
            trial.secondary < options.min_mcc_guard)
            trial.guard_rejected = true;

        study.trials.push_back(trial);
        if (on_trial) on_trial(study.trials.back());
    }

    // Best = max (recall, mcc, -id) over complete, guard-eligible trials;
    // if the guard rejected everything, fall back to all complete trials.
    const Trial* best = nullptr;
    for (const auto& t : study.trials) {
        if (t.status != TrialStatus::complete || t.guard_rejected) continue;
        if (!best || better_trial(t, *best)) best = &t;
    }
    if (!best) {
        for (const auto& t : study.trials) {
            if (t.status != TrialStatus::complete) continue;
            if (!best || better_trial(t, *best)) best = &t;
        }
    }
    if (!best) throw Error("optimize: every trial failed");
    study.best_trial_id = best->id;

    study.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return study;
}

}  // namespace automal
