#include "automal/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "automal/explain.hpp"
#include "automal/features.hpp"
#include "automal/hpo.hpp"
#include "automal/parallel.hpp"
#include "automal/preprocess.hpp"
#include "automal/profile.hpp"
#include "automal/report.hpp"
#include "automal/rng.hpp"
#include "automal/trainers.hpp"

namespace automal {

namespace {

// Stage tags for per-stage seed derivation.
enum : std::uint64_t {
    kSeedLassoVal = 102,
    kSeedHpo = 103,
    kSeedMembers = 104,
    kSeedExplain = 105,
    kSeedBackground = 106,
    kSeedBalance = 107,
};

// No-op when store is null, so the data path can run outside a tracked run.
struct StageLog {
    RunStore* store = nullptr;
    std::string run_id;

    void param(const std::string& k, const std::string& v) const {
        if (store) store->log_param(run_id, k, v);
    }
    void metric(const std::string& k, double v, int step = 0) const {
        if (store) store->log_metric(run_id, k, v, step);
    }
    void artifact(const std::string& name, const std::string& content) const {
        if (store) store->log_artifact_text(run_id, name, content);
    }
    void timed(const std::string& name, const std::function<void()>& fn) const {
        StageProbe probe(name);
        fn();
        const ResourceReport r = probe.finish();
        if (!store) return;
        store->log_metric(run_id, "time." + name, r.wall_seconds);
        if (r.rss_available)
            store->log_metric(run_id, "resource.peak_rss_bytes",
                              static_cast<double>(r.peak_rss_bytes));
    }
};

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

MemberConfig roster_member(const std::string& name, std::uint64_t seed) {
    for (auto& m : default_roster(seed))
        if (m.name == name) return m;
    throw ValueError("pipeline: unknown roster member '" + name + "'");
}

// LASSO with labels as the regression target; lambda from a 5-point log
// grid on a validation split maximizing downstream recall (ties prefer the
// larger lambda, i.e. the sparser model).
LassoModel fit_lasso_auto(const Dataset& train, const PipelineConfig& config,
                          std::uint64_t seed, const StageLog& log) {
    std::vector<double> y(train.labels.begin(), train.labels.end());
    const double tol = config.get_real("features.tol");
    const auto max_iter = static_cast<std::size_t>(config.get_int("features.max_iter"));

    if (config.get("features.lambda") != "auto")
        return fit_lasso(train.features, y, config.get_real("features.lambda"), tol,
                         max_iter);

    const double lambda_max = lasso_lambda_max(train.features, y);
    if (lambda_max == 0.0) return fit_lasso(train.features, y, 0.0, tol, max_iter);

    const SplitPlan val_split =
        split_holdout(train, 0.8, derive_seed(seed, kSeedLassoVal), true);
    const Dataset fit_part = train.subset_rows(val_split.train_indices);
    const Dataset val_part = train.subset_rows(val_split.test_indices);
    std::vector<double> y_fit(fit_part.labels.begin(), fit_part.labels.end());

    const double grid[] = {1e-3, 3.162e-3, 1e-2, 3.162e-2, 1e-1};
    double best_lambda = grid[0] * lambda_max;
    double best_recall = -1.0;
    for (double factor : grid) {
        const double lambda = factor * lambda_max;
        const LassoModel m = fit_lasso(fit_part.features, y_fit, lambda, tol, max_iter);
        const FeatureMask mask = lasso_select(m, config.get_real("features.threshold"));
        const auto kept = mask.kept_indices();

        MemberConfig probe_cfg;
        probe_cfg.family = ModelFamily::gbt;
        probe_cfg.params = {{"n_rounds", "100"}, {"max_leaves", "31"}};
        const ModelArtifact probe_model = train_model(fit_part.subset_cols(kept), probe_cfg);
        const Dataset val_masked = val_part.subset_cols(kept);
        const auto labels = predict_labels(probe_model, val_masked.features);
        const double recall =
            classification_metrics(confusion(val_masked.labels, labels)).recall;
        log.metric("features.lambda_grid_recall", recall,
                   static_cast<int>(std::llround(factor * 1e6)));
        if (recall >= best_recall) {
            best_recall = recall;
            best_lambda = lambda;
        }
    }
    log.metric("features.lambda_selected", best_lambda);
    return fit_lasso(train.features, y, best_lambda, tol, max_iter);
}

}  // namespace

PreparedData prepare_pipeline_data(const PipelineConfig& config, RunStore* store,
                                   const std::string& run_id, std::string* stage_out) {
    const auto seed = static_cast<std::uint64_t>(config.get_int("seed"));
    StageLog log{store, run_id};
    std::string local_stage;
    std::string& stage = stage_out ? *stage_out : local_stage;

    PreparedData data;
    Dataset ds;

    // Data Info: environment plus dataset exploration.
    log.timed("profile", [&] {
        stage = "profile";
        CsvOptions opts;
        opts.label_column = config.get("dataset.label");
        opts.malware_label = config.get("dataset.malware_label");
        ds = load_csv(config.get("dataset.path"), opts);
        log.artifact("environment.json", snapshot_environment().to_json());
        log.artifact("profile.json", profile_dataset(ds).to_json());
        log.param("dataset.rows", std::to_string(ds.n_rows()));
        log.param("dataset.cols", std::to_string(ds.n_cols()));
    });

    if (config.get("preprocess.balance") == "unique_undersample") {
        log.timed("balance", [&] {
            stage = "balance";
            ds = balance_unique(ds, derive_seed(seed, kSeedBalance));
            log.param("preprocess.balanced_rows", std::to_string(ds.n_rows()));
        });
    }

    stage = "split";
    const SplitPlan split = split_holdout(ds, config.get_real("split.ratio"), seed,
                                          config.get_flag("split.stratified"));
    data.train = ds.subset_rows(split.train_indices);
    data.test = ds.subset_rows(split.test_indices);
    log.param("split.train_rows", std::to_string(data.train.n_rows()));
    log.param("split.test_rows", std::to_string(data.test.n_rows()));

    // Preprocessing: plan fitted on the training partition only.
    log.timed("preprocess", [&] {
        stage = "preprocess";
        PreprocessConfig pc;
        pc.drop_duplicates = config.get_flag("preprocess.dedupe");
        pc.remove_outliers = config.get("preprocess.outliers") == "iqr";
        pc.iqr_k = config.get_real("preprocess.iqr_k");
        pc.encode_onehot = config.get_flag("preprocess.onehot");
        const PreprocessPlan plan = fit_preprocessor(data.train, pc);
        data.train = apply_preprocessor(plan, data.train, true);
        data.test = apply_preprocessor(plan, data.test, false);
        log.param("preprocess.train_rows_after", std::to_string(data.train.n_rows()));
        log.param("preprocess.cols_after", std::to_string(data.train.n_cols()));
        for (std::size_t w = 0; w < plan.warnings.size(); ++w)
            log.param("preprocess.warning." + std::to_string(w), plan.warnings[w]);
    });

    // Feature engineering.
    log.timed("features", [&] {
        stage = "features";
        const std::string method = config.get("features.method");
        log.param("features.method_used", method);
        if (method == "none") return;

        if (method == "pca") {
            const auto want =
                static_cast<std::size_t>(config.get_int("features.n_components"));
            const std::size_t n_comp =
                std::min(want, std::min(data.train.n_rows() - 1, data.train.n_cols()));
            const PcaModel pca = fit_pca(data.train.features, n_comp);
            auto as_pca = [&](const Dataset& src) {
                Dataset out;
                out.features = pca.transform(src.features);
                out.labels = src.labels;
                out.source_id = src.source_id;
                for (std::size_t k = 0; k < n_comp; ++k) {
                    out.feature_names.push_back("pc" + std::to_string(k));
                    out.feature_kinds.push_back(FeatureKind::numeric);
                    out.levels.emplace_back();
                }
                return out;
            };
            data.train = as_pca(data.train);
            data.test = as_pca(data.test);
            log.param("features.kept", std::to_string(n_comp));
            return;
        }

        FeatureMask mask;
        std::vector<double> lasso_coef;
        if (method == "anova") {
            const auto scores = anova_f_scores(data.train.features, data.train.labels);
            const auto k = std::min<std::size_t>(
                static_cast<std::size_t>(config.get_int("features.k")), scores.size());
            mask = select_k_best(scores, k);
        } else {  // lasso
            const LassoModel lasso = fit_lasso_auto(data.train, config, seed, log);
            mask = lasso_select(lasso, config.get_real("features.threshold"));
            lasso_coef = lasso.original_coefficients();
            log.param("features.lasso_converged", lasso.converged ? "true" : "false");
        }
        const auto kept = mask.kept_indices();
        std::ostringstream csv;
        csv.precision(17);
        csv << (lasso_coef.empty() ? "feature\n" : "feature,coefficient\n");
        for (auto c : kept) {
            csv << data.train.feature_names[c];
            if (!lasso_coef.empty()) csv << ',' << lasso_coef[c];
            csv << '\n';
        }
        log.artifact("selected_features.csv", csv.str());
        log.param("features.kept", std::to_string(kept.size()));
        data.train = data.train.subset_cols(kept);
        data.test = data.test.subset_cols(kept);
    });
    return data;
}

PipelineResult run_pipeline(const PipelineConfig& config, RunStore& store,
                            const std::string& parent_id) {
    config.validate();
    set_threads(static_cast<int>(config.get_int("threads")));
    const auto seed = static_cast<std::uint64_t>(config.get_int("seed"));

    PipelineResult result;
    StageProbe total_probe("run");
    const std::string run_id = store.start_run(config.to_json(), parent_id);
    result.run_id = run_id;
    StageLog log{&store, run_id};

    std::string stage = "setup";
    try {
        PreparedData data = prepare_pipeline_data(config, &store, run_id, &stage);
        Dataset& train = data.train;
        Dataset& test = data.test;

        // Roster and hyperparameter search.
        const auto roster_names = split_csv_list(config.get("models.roster"));
        std::vector<MemberConfig> members;
        for (const auto& name : roster_names)
            members.push_back(roster_member(name, derive_seed(seed, kSeedMembers)));

        if (config.get_flag("hpo.enable")) {
            log.timed("hpo", [&] {
                stage = "hpo";
                const std::uint64_t hpo_seed =
                    config.get("hpo.seed").empty()
                        ? derive_seed(seed, kSeedHpo)
                        : static_cast<std::uint64_t>(config.get_int("hpo.seed"));

                Validation validation;
                if (config.get("hpo.validation") == "kfold")
                    validation =
                        kfold_plan(train, static_cast<int>(config.get_int("hpo.kfolds")),
                                   derive_seed(hpo_seed, 1), true);
                else
                    validation = split_holdout(train, 0.8, derive_seed(hpo_seed, 2), true);

                // The trial budget spreads over the roster; earlier members
                // absorb the remainder.
                const auto total = static_cast<std::size_t>(config.get_int("hpo.n_trials"));
                std::vector<std::size_t> shares(members.size(), total / members.size());
                for (std::size_t i = 0; i < total % members.size(); ++i) ++shares[i];

                for (std::size_t m = 0; m < members.size(); ++m) {
                    if (shares[m] == 0) continue;
                    OptimizeOptions opt;
                    opt.n_trials = static_cast<int>(shares[m]);
                    opt.seed = derive_seed(hpo_seed, 1000 + m);
                    opt.pruner = config.get("hpo.pruner") == "halving";
                    opt.eta = static_cast<int>(config.get_int("hpo.eta"));
                    opt.rungs = static_cast<int>(config.get_int("hpo.rungs"));
                    opt.min_mcc_guard = config.get_real("hpo.min_mcc_guard");

                    const SearchSpace space = default_space(members[m].family);
                    const StudyResult study = optimize(
                        train, space, validation, opt, members[m], [&](const Trial& t) {
                            nlohmann::json tj(t.params);
                            tj["member"] = members[m].name;
                            const std::string child = store.start_run(tj.dump(), run_id);
                            store.log_param(child, "trial.member", members[m].name);
                            store.log_param(child, "trial.id", std::to_string(t.id));
                            store.log_param(child, "trial.status",
                                            t.status == TrialStatus::complete ? "complete"
                                            : t.status == TrialStatus::pruned ? "pruned"
                                                                              : "failed");
                            if (t.status != TrialStatus::failed) {
                                store.log_metric(child, "recall", t.objective);
                                store.log_metric(child, "mcc", t.secondary);
                                store.log_metric(child, "budget",
                                                 static_cast<double>(t.budget_consumed));
                            }
                            store.finish_run(child, t.status == TrialStatus::failed
                                                        ? RunStatus::failed
                                                        : RunStatus::finished);
                        });

                    const Trial& best = study.best();
                    for (const auto& [k, v] : best.params) {
                        members[m].params[k] = v;
                        store.log_param(run_id, "best." + members[m].name + "." + k, v);
                    }
                    store.log_metric(run_id, "hpo." + members[m].name + ".best_recall",
                                     best.objective);
                }
            });
        }
        for (const auto& m : members) result.best_params[m.name] = m.params;

        // Final fit on the full training partition.
        ModelArtifact model;
        log.timed("fit", [&] {
            stage = "fit";
            std::vector<std::string> warnings;
            const Voting voting =
                config.get("models.voting") == "hard" ? Voting::hard : Voting::soft;
            model = train_voting_ensemble(train, members, voting, {}, &warnings);
            for (std::size_t w = 0; w < warnings.size(); ++w)
                store.log_param(run_id, "models.warning." + std::to_string(w), warnings[w]);
            store.log_artifact_text(run_id, "model.automal", model_to_string(model));
        });

        // Evaluation on the held-out partition.
        log.timed("evaluate", [&] {
            stage = "evaluate";
            const Matrix proba = predict_proba(model, test.features);
            const auto labels = hard_labels(proba);
            std::vector<double> scores(test.n_rows());
            for (std::size_t r = 0; r < test.n_rows(); ++r) scores[r] = proba(r, 1);

            result.test_metrics = classification_metrics(confusion(test.labels, labels));
            result.roc_auc = roc_auc(test.labels, scores);

            store.log_metric(run_id, "recall", result.test_metrics.recall);
            store.log_metric(run_id, "precision", result.test_metrics.precision);
            store.log_metric(run_id, "accuracy", result.test_metrics.accuracy);
            store.log_metric(run_id, "f1", result.test_metrics.f1);
            store.log_metric(run_id, "mcc", result.test_metrics.mcc);
            store.log_metric(run_id, "roc_auc", result.roc_auc);
            store.log_metric(run_id, "tp", static_cast<double>(result.test_metrics.counts.tp));
            store.log_metric(run_id, "fp", static_cast<double>(result.test_metrics.counts.fp));
            store.log_metric(run_id, "fn", static_cast<double>(result.test_metrics.counts.fn));
            store.log_metric(run_id, "tn", static_cast<double>(result.test_metrics.counts.tn));

            std::ostringstream pr;
            pr.precision(17);
            pr << "threshold,recall,precision\n";
            for (const auto& p : pr_curve(test.labels, scores))
                pr << p.threshold << ',' << p.recall << ',' << p.precision << '\n';
            store.log_artifact_text(run_id, "pr_curve.csv", pr.str());

            std::ostringstream roc;
            roc.precision(17);
            roc << "threshold,fpr,tpr\n";
            for (const auto& p : roc_curve(test.labels, scores))
                roc << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
            store.log_artifact_text(run_id, "roc_curve.csv", roc.str());
        });

        // Interpretability artifacts.
        if (config.get_flag("explain.enable")) {
            log.timed("explain", [&] {
                stage = "explain";
                const auto repeats = static_cast<int>(config.get_int("explain.repeats"));
                const ImportanceReport imp = permutation_importance(
                    model, test, ImportanceMetric::recall, repeats,
                    derive_seed(seed, kSeedExplain));
                store.log_artifact_text(run_id, "importance.csv",
                                        imp.to_csv(test.feature_names));

                // Shapley on a handful of test rows against a sampled
                // training background.
                Rng bg_rng(derive_seed(seed, kSeedBackground));
                const auto bg_count = std::min<std::size_t>(
                    static_cast<std::size_t>(config.get_int("explain.background")),
                    train.n_rows());
                const Dataset background = train.subset_rows(
                    bg_rng.sample_without_replacement(train.n_rows(), bg_count));
                const auto n_inst = std::min<std::size_t>(
                    static_cast<std::size_t>(config.get_int("explain.instances")),
                    test.n_rows());
                std::ostringstream shap;
                shap.precision(17);
                shap << "instance,feature,phi,std_error\n";
                for (std::size_t i = 0; i < n_inst; ++i) {
                    const Attribution a = shapley_sampled(
                        model, test.features.row(i), background,
                        static_cast<int>(config.get_int("explain.samples")),
                        derive_seed(seed, kSeedExplain + 100 + i));
                    for (std::size_t c = 0; c < a.phi.size(); ++c)
                        shap << i << ',' << test.feature_names[c] << ',' << a.phi[c] << ','
                             << a.std_error[c] << '\n';
                }
                store.log_artifact_text(run_id, "attributions.csv", shap.str());

                // Intrinsic interpretability: export the tree member when
                // the roster carries one.
                const auto& ensemble = std::get<EnsembleModel>(model.model);
                for (const auto& member : ensemble.members) {
                    if (member.family != ModelFamily::tree) continue;
                    store.log_artifact_text(
                        run_id, "tree.dot",
                        export_tree(std::get<TreeModel>(member.model),
                                    test.feature_names));
                    break;
                }
            });
        }

        result.wall_seconds = total_probe.finish().wall_seconds;
        store.log_metric(run_id, "time.total", result.wall_seconds);
        store.finish_run(run_id, RunStatus::finished);

        if (config.get_flag("report.enable")) {
            const std::string report = render_report(store, run_id);
            std::ofstream out(store.root() / "runs" / run_id / "report.md");
            out << report;
        }
    } catch (...) {
        store.finish_run(run_id, RunStatus::failed, stage);
        throw;
    }
    return result;
}

PipelineResult run_replay(const PipelineConfig& original_snapshot, RunStore& store) {
    return run_pipeline(original_snapshot, store);
}

bool metrics_match(const RunRecord& a, const RunRecord& b, std::string* first_mismatch) {
    // Wall-clock and memory probes legitimately differ between executions.
    auto comparable = [](const std::string& key) {
        return key.rfind("time.", 0) != 0 && key.rfind("resource.", 0) != 0;
    };
    for (const auto& [key, series] : a.metrics) {
        if (!comparable(key)) continue;
        auto it = b.metrics.find(key);
        if (it == b.metrics.end() || it->second.size() != series.size()) {
            if (first_mismatch) *first_mismatch = key;
            return false;
        }
        for (std::size_t i = 0; i < series.size(); ++i)
            if (series[i] != it->second[i]) {
                if (first_mismatch) *first_mismatch = key;
                return false;
            }
    }
    for (const auto& [key, series] : b.metrics) {
        if (!comparable(key)) continue;
        if (!a.metrics.count(key)) {
            if (first_mismatch) *first_mismatch = key;
            return false;
        }
    }
    return true;
}

}  // namespace automal
