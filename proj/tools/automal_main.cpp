#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "automal/config.hpp"
#include "automal/dataset.hpp"
#include "automal/explain.hpp"
#include "automal/model.hpp"
#include "automal/parallel.hpp"
#include "automal/pipeline.hpp"
#include "automal/profile.hpp"
#include "automal/report.hpp"
#include "automal/rng.hpp"
#include "automal/scorecard.hpp"
#include "automal/tracking.hpp"

namespace fs = std::filesystem;
using namespace automal;

namespace {

std::string tracking_root(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("AUTOMAL_TRACKING_ROOT"); env && *env) return env;
    return "mhruns";
}

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + out_path + "'");
    out << content;
}

int cmd_profile(const std::string& dataset, const std::string& label, bool json_mode,
                const std::string& out_path) {
    CsvOptions opts;
    opts.label_column = label;
    const Dataset ds = load_csv(dataset, opts);
    const DatasetProfile profile = profile_dataset(ds);
    const std::string doc = profile.to_json();
    if (!out_path.empty()) write_or_print(out_path, doc + "\n");

    if (json_mode) {
        std::cout << doc << '\n';
        return 0;
    }
    std::cout << "dataset: " << dataset << '\n'
              << "rows: " << profile.n_rows << "  features: " << profile.n_cols << '\n'
              << "class counts: benign " << profile.class_counts[0] << ", malware "
              << profile.class_counts[1] << " (imbalance " << profile.imbalance_ratio
              << ")\n"
              << "duplicate feature rows: " << profile.duplicate_rows
              << " (label conflicts " << profile.label_conflicts << ")\n"
              << "column kinds: binary " << profile.binary_cols << ", numeric "
              << profile.numeric_cols << ", categorical " << profile.categorical_cols
              << '\n';
    return 0;
}

int cmd_run(const PipelineConfig& config, const std::string& root, bool json_mode,
            const std::string& replay_id) {
    RunStore store{fs::path(root)};

    if (!replay_id.empty()) {
        const RunRecord original = store.read_run(replay_id);
        const PipelineConfig snapshot =
            PipelineConfig::from_snapshot_json(original.config_json);
        const PipelineResult redo = run_replay(snapshot, store);
        const RunRecord redo_rec = store.read_run(redo.run_id);
        std::string mismatch;
        const bool ok = metrics_match(original, redo_rec, &mismatch);
        if (json_mode) {
            nlohmann::json j;
            j["run_id"] = redo.run_id;
            j["replay_of"] = replay_id;
            j["metrics_match"] = ok;
            if (!ok) j["first_mismatch"] = mismatch;
            std::cout << j.dump(2) << '\n';
        } else {
            std::cout << "replayed " << replay_id << " as " << redo.run_id << '\n'
                      << "metrics match: " << (ok ? "yes" : "NO (" + mismatch + ")")
                      << '\n';
        }
        return ok ? 0 : 1;
    }

    const PipelineResult result = run_pipeline(config, store);
    if (json_mode) {
        nlohmann::json j;
        j["run_id"] = result.run_id;
        j["recall"] = result.test_metrics.recall;
        j["mcc"] = result.test_metrics.mcc;
        j["roc_auc"] = result.roc_auc;
        j["wall_seconds"] = result.wall_seconds;
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "run id: " << result.run_id << '\n';
        std::printf("recall: %.4f  mcc: %.4f  wall: %.1fs\n", result.test_metrics.recall,
                    result.test_metrics.mcc, result.wall_seconds);
    }
    return 0;
}

int cmd_explain(const std::string& root, const std::string& run_id,
                const std::string& method, const std::string& member, int samples,
                int repeats, int instance, std::uint64_t seed,
                const std::string& out_path) {
    RunStore store{fs::path(root)};
    const RunRecord rec = store.read_run(run_id);
    ModelArtifact model = model_from_string(store.read_artifact(run_id, "model.automal"));

    // Default: explain the final ensemble; --member narrows to one roster
    // member by its name.
    if (!member.empty()) {
        const auto* ensemble = std::get_if<EnsembleModel>(&model.model);
        if (!ensemble) throw ValueError("explain: the stored model has no members");
        const ModelArtifact* picked = nullptr;
        for (const auto& m : ensemble->members) {
            auto it = m.hyperparams.find("member");
            if (it != m.hyperparams.end() && it->second == member) picked = &m;
        }
        if (!picked) throw ValueError("explain: no ensemble member named '" + member + "'");
        model = *picked;
    }

    // Rebuild the exact feature space of the stored model from the config
    // snapshot (the data path is fully seeded).
    const PipelineConfig config = PipelineConfig::from_snapshot_json(rec.config_json);
    const PreparedData data = prepare_pipeline_data(config, nullptr, "");

    if (method == "importance") {
        const ImportanceReport imp = permutation_importance(
            model, data.test, ImportanceMetric::recall, repeats, seed);
        write_or_print(out_path, imp.to_csv(data.test.feature_names));
        return 0;
    }
    if (method == "shapley") {
        const auto idx = static_cast<std::size_t>(instance);
        if (idx >= data.test.n_rows()) throw ValueError("explain: instance out of range");
        Rng bg_rng(derive_seed(seed, 1));
        const auto bg_count = std::min<std::size_t>(100, data.train.n_rows());
        const Dataset background = data.train.subset_rows(
            bg_rng.sample_without_replacement(data.train.n_rows(), bg_count));
        const Attribution a = shapley_sampled(model, data.test.features.row(idx),
                                              background, samples, seed);
        write_or_print(out_path, attribution_to_csv(a, data.test.feature_names));
        return 0;
    }
    if (method == "surrogate") {
        const auto idx = static_cast<std::size_t>(instance);
        if (idx >= data.test.n_rows()) throw ValueError("explain: instance out of range");
        Rng bg_rng(derive_seed(seed, 1));
        const auto bg_count = std::min<std::size_t>(100, data.train.n_rows());
        const Dataset background = data.train.subset_rows(
            bg_rng.sample_without_replacement(data.train.n_rows(), bg_count));
        const LocalExplanation ex =
            local_surrogate(model, data.test.features.row(idx), background,
                            std::max(samples, static_cast<int>(data.test.n_cols()) + 2),
                            0.0, seed);
        std::ostringstream csv;
        csv.precision(17);
        csv << "feature,coefficient\n";
        csv << "(intercept)," << ex.intercept << '\n';
        for (std::size_t c = 0; c < ex.coefficients.size(); ++c)
            csv << data.test.feature_names[c] << ',' << ex.coefficients[c] << '\n';
        csv << "# fidelity_r2,"
            << (ex.fidelity_defined ? std::to_string(ex.fidelity_r2) : "undefined") << '\n';
        write_or_print(out_path, csv.str());
        return 0;
    }
    throw ValueError("explain: unknown method '" + method + "'");
}

int cmd_score(const std::string& questionnaire_path, const std::string& out_path) {
    const Questionnaire q = load_questionnaire(questionnaire_path);
    const Scorecard card = score_tool(q);
    std::cout << scorecard_to_text(card);
    if (!out_path.empty()) write_or_print(out_path, compare_scorecards({card}));
    return 0;
}

int cmd_compare(const std::string& root, const std::vector<std::string>& run_ids,
                const std::vector<std::string>& scorecard_paths,
                std::vector<std::string> metrics, const std::string& sort_key,
                const std::string& out_path) {
    if (!scorecard_paths.empty()) {
        std::vector<Scorecard> cards;
        for (const auto& p : scorecard_paths) cards.push_back(score_tool(load_questionnaire(p)));
        write_or_print(out_path, compare_scorecards(cards));
        return 0;
    }
    if (run_ids.empty()) throw ValueError("compare: need run ids or --scorecards");
    if (metrics.empty()) metrics = {"recall", "mcc"};
    RunStore store{fs::path(root)};
    ComparisonTable table = store.compare_runs(run_ids, metrics);
    if (!sort_key.empty()) table.sort_by(sort_key);
    write_or_print(out_path, table.to_csv());
    return 0;
}

int cmd_report(const std::string& root, const std::vector<std::string>& run_ids,
               const std::vector<std::string>& metrics, const std::string& out_path) {
    RunStore store{fs::path(root)};
    std::string doc;
    if (run_ids.size() == 1)
        doc = render_report(store, run_ids[0]);
    else
        doc = render_comparison_report(store, run_ids,
                                       metrics.empty() ? std::vector<std::string>{"recall",
                                                                                  "mcc"}
                                                       : metrics);
    write_or_print(out_path, doc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"automal: AutoML engine for tabular malware detection"};
    app.require_subcommand(1);

    std::string root_flag;
    int threads = 0;
    bool json_mode = false;
    app.add_option("--tracking-root", root_flag,
                   "run store directory (env AUTOMAL_TRACKING_ROOT)");
    app.add_option("--threads", threads, "worker threads, 0 = hardware count");
    app.add_flag("--json", json_mode, "machine-readable stdout");

    // profile
    auto* profile = app.add_subcommand("profile", "dataset and environment exploration");
    std::string p_dataset, p_label = "class", p_out;
    profile->add_option("dataset", p_dataset, "CSV path")->required();
    profile->add_option("--label", p_label, "label column name");
    profile->add_option("--out", p_out, "write the profile JSON here");

    // run
    auto* run = app.add_subcommand("run", "execute the full pipeline");
    std::string r_config, r_dataset, r_label, r_balance, r_features, r_replay;
    std::vector<std::string> r_sets;
    long long r_seed = -1, r_trials = -1;
    run->add_option("--config", r_config, "pipeline config file");
    run->add_option("--dataset", r_dataset, "dataset CSV (overrides config)");
    run->add_option("--label", r_label, "label column (overrides config)");
    run->add_option("--seed", r_seed, "base seed (overrides config)");
    run->add_option("--trials", r_trials, "HPO trial budget (overrides config)");
    run->add_option("--balance", r_balance, "off|unique_undersample");
    run->add_option("--features", r_features, "lasso|anova|pca|none");
    run->add_option("--set", r_sets, "extra key=value overrides")->take_all();
    run->add_option("--replay", r_replay, "re-execute an existing run's snapshot");

    // explain
    auto* explain = app.add_subcommand("explain", "explanations for a finished run");
    std::string e_run, e_method = "shapley", e_member, e_out;
    int e_samples = 2000, e_repeats = 5, e_instance = 0;
    std::uint64_t e_seed = 7;
    explain->add_option("run_id", e_run, "run to explain")->required();
    explain->add_option("--method", e_method, "importance|shapley|surrogate");
    explain->add_option("--member", e_member, "explain one ensemble member by name");
    explain->add_option("--samples", e_samples, "shapley/surrogate samples");
    explain->add_option("--repeats", e_repeats, "importance repeats");
    explain->add_option("--instance", e_instance, "test row to explain");
    explain->add_option("--seed", e_seed, "explanation seed");
    explain->add_option("--out", e_out, "write CSV here instead of stdout");

    // score
    auto* score = app.add_subcommand("score", "transparency questionnaire scoring");
    std::string s_path, s_out;
    score->add_option("questionnaire", s_path, "questionnaire file")->required();
    score->add_option("--out", s_out, "also write a one-row comparison CSV");

    // compare
    auto* compare = app.add_subcommand("compare", "compare runs or scorecards");
    std::vector<std::string> c_runs, c_cards, c_metrics;
    std::string c_sort, c_out;
    compare->add_option("runs", c_runs, "run ids");
    compare->add_option("--scorecards", c_cards, "questionnaire files")->take_all();
    compare->add_option("--metric", c_metrics, "metric columns")->take_all();
    compare->add_option("--sort", c_sort, "sort rows by this metric, descending");
    compare->add_option("--out", c_out, "write CSV here instead of stdout");

    // report
    auto* report = app.add_subcommand("report", "render a run report");
    std::vector<std::string> rep_runs, rep_metrics;
    std::string rep_out;
    report->add_option("runs", rep_runs, "one run id, or several for a comparison")
        ->required();
    report->add_option("--metric", rep_metrics, "comparison metric columns")->take_all();
    report->add_option("--out", rep_out, "write markdown here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        set_threads(threads);
        const std::string root = tracking_root(root_flag);

        if (profile->parsed()) return cmd_profile(p_dataset, p_label, json_mode, p_out);

        if (run->parsed()) {
            PipelineConfig config = r_config.empty() ? PipelineConfig::defaults()
                                                     : PipelineConfig::from_file(r_config);
            if (!r_dataset.empty()) config.set("dataset.path", r_dataset);
            if (!r_label.empty()) config.set("dataset.label", r_label);
            if (r_seed >= 0) config.set("seed", std::to_string(r_seed));
            if (r_trials >= 0) config.set("hpo.n_trials", std::to_string(r_trials));
            if (!r_balance.empty()) config.set("preprocess.balance", r_balance);
            if (!r_features.empty()) config.set("features.method", r_features);
            if (threads != 0) config.set("threads", std::to_string(threads));
            for (const auto& kv : r_sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw ValueError("--set expects key=value, got '" + kv + "'");
                config.set(kv.substr(0, eq), kv.substr(eq + 1));
            }
            return cmd_run(config, root, json_mode, r_replay);
        }

        if (explain->parsed())
            return cmd_explain(root, e_run, e_method, e_member, e_samples, e_repeats,
                               e_instance, e_seed, e_out);
        if (score->parsed()) return cmd_score(s_path, s_out);
        if (compare->parsed())
            return cmd_compare(root, c_runs, c_cards, c_metrics, c_sort, c_out);
        if (report->parsed()) return cmd_report(root, rep_runs, rep_metrics, rep_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
