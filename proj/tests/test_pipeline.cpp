#include <doctest.h>

#include <filesystem>

#include "automal/dataset.hpp"
#include "automal/features.hpp"
#include "automal/pipeline.hpp"
#include "automal/preprocess.hpp"
#include "helpers.hpp"

using namespace automal;
using testutil::TempDir;

namespace {

// Small planted-signal dataset written as a CSV fixture.
std::string write_fixture(const TempDir& dir, std::size_t rows = 400) {
    const Dataset ds = testutil::make_binary_signal(rows, 12, 6, 4242);
    const std::string path = dir.file("fixture.csv");
    save_csv(ds, path);
    return path;
}

PipelineConfig small_config(const std::string& csv_path) {
    PipelineConfig config = PipelineConfig::defaults();
    config.set("dataset.path", csv_path);
    config.set("hpo.n_trials", "6");
    config.set("explain.samples", "200");
    config.set("explain.instances", "2");
    config.set("explain.repeats", "2");
    config.set("threads", "2");
    return config;
}

}  // namespace

TEST_CASE("config: schema validation and overrides") {
    PipelineConfig config = PipelineConfig::defaults();
    CHECK(config.get("split.ratio") == "0.8");
    CHECK(config.get("features.method") == "lasso");
    CHECK_THROWS_AS(config.set("nonsense.key", "1"), ValueError);
    CHECK_THROWS_AS(config.get("nope"), ValueError);

    config.set("split.ratio", "1.5");
    CHECK_THROWS_AS(config.validate(), ValueError);
    config.set("split.ratio", "0.8");
    config.set("models.roster", "tree,ufo");
    CHECK_THROWS_AS(config.validate(), ValueError);
    config.set("models.roster", "tree,knn");
    config.validate();

    // snapshot round-trip preserves every key
    const std::string json = config.to_json();
    const PipelineConfig back = PipelineConfig::from_snapshot_json(json);
    CHECK(back.entries() == config.entries());
}

TEST_CASE("config: file parsing with comments and unknown keys") {
    TempDir dir("config");
    testutil::write_file(dir.file("ok.conf"),
                         "# comment\n"
                         "seed = 7\n"
                         "features.method = anova\n");
    const PipelineConfig config = PipelineConfig::from_file(dir.file("ok.conf"));
    CHECK(config.get("seed") == "7");
    CHECK(config.get("features.method") == "anova");

    testutil::write_file(dir.file("bad.conf"), "mystery = 1\n");
    CHECK_THROWS_AS(PipelineConfig::from_file(dir.file("bad.conf")), ValueError);
}

TEST_CASE("pipeline: end-to-end run produces a finished, complete record") {
    TempDir dir("e2e");
    const std::string csv = write_fixture(dir);
    RunStore store(dir.path() / "store");

    const PipelineConfig config = small_config(csv);
    const PipelineResult result = run_pipeline(config, store);

    const RunRecord rec = store.read_run(result.run_id);
    CHECK(rec.status == RunStatus::finished);
    CHECK(rec.metric("recall").has_value());
    CHECK(rec.metric("mcc").has_value());
    CHECK(rec.metric("roc_auc").has_value());
    CHECK(*rec.metric("recall") == result.test_metrics.recall);

    // planted signal is learnable
    CHECK(result.test_metrics.recall > 0.7);
    CHECK(result.roc_auc > 0.8);

    // artifacts exist and hash-verify
    for (const char* name : {"profile.json", "environment.json", "selected_features.csv",
                             "model.automal", "pr_curve.csv", "roc_curve.csv",
                             "importance.csv", "attributions.csv", "tree.dot"}) {
        CHECK(!store.read_artifact(result.run_id, name).empty());
    }

    // report rendered next to the run's artifacts
    CHECK(std::filesystem::exists(store.root() / "runs" / result.run_id / "report.md"));

    // one child run per HPO trial
    std::size_t children = 0;
    for (const auto& id : store.list_run_ids())
        if (store.read_run(id).parent_id == result.run_id) ++children;
    CHECK(children == 6);
}

TEST_CASE("pipeline: hpo.n_trials=1 creates exactly one child run") {
    TempDir dir("one_trial");
    const std::string csv = write_fixture(dir, 200);
    RunStore store(dir.path() / "store");

    PipelineConfig config = small_config(csv);
    config.set("hpo.n_trials", "1");
    config.set("explain.enable", "off");
    const PipelineResult result = run_pipeline(config, store);

    std::size_t children = 0;
    for (const auto& id : store.list_run_ids())
        if (store.read_run(id).parent_id == result.run_id) ++children;
    CHECK(children == 1);
}

TEST_CASE("pipeline: identical config and seed reproduce identical metrics") {
    TempDir dir("repro");
    const std::string csv = write_fixture(dir, 250);
    RunStore store(dir.path() / "store");

    PipelineConfig config = small_config(csv);
    config.set("hpo.n_trials", "4");
    config.set("explain.enable", "off");

    const PipelineResult a = run_pipeline(config, store);
    const PipelineResult b = run_pipeline(config, store);
    std::string mismatch;
    CHECK(metrics_match(store.read_run(a.run_id), store.read_run(b.run_id), &mismatch));
    INFO("first mismatch: ", mismatch);
    CHECK(a.best_params == b.best_params);
}

TEST_CASE("pipeline: replay from the stored snapshot matches exactly") {
    TempDir dir("replay");
    const std::string csv = write_fixture(dir, 250);
    RunStore store(dir.path() / "store");

    PipelineConfig config = small_config(csv);
    config.set("hpo.n_trials", "3");
    config.set("explain.enable", "off");
    const PipelineResult original = run_pipeline(config, store);

    const RunRecord original_rec = store.read_run(original.run_id);
    const PipelineConfig snapshot =
        PipelineConfig::from_snapshot_json(original_rec.config_json);
    const PipelineResult replayed = run_replay(snapshot, store);

    std::string mismatch;
    CHECK(metrics_match(original_rec, store.read_run(replayed.run_id), &mismatch));
    INFO("first mismatch: ", mismatch);
}

TEST_CASE("pipeline: failure marks the run failed with the stage name") {
    TempDir dir("fail");
    RunStore store(dir.path() / "store");
    PipelineConfig config = PipelineConfig::defaults();
    config.set("dataset.path", dir.file("missing.csv"));
    CHECK_THROWS(run_pipeline(config, store));

    const auto ids = store.list_run_ids();
    REQUIRE(ids.size() == 1);
    const RunRecord rec = store.read_run(ids[0]);
    CHECK(rec.status == RunStatus::failed);
    CHECK(rec.failure_stage == "profile");
}

TEST_CASE("pipeline: alternative feature methods run end to end") {
    TempDir dir("alt");
    const std::string csv = write_fixture(dir, 200);
    RunStore store(dir.path() / "store");

    for (const char* method : {"anova", "pca", "none"}) {
        PipelineConfig config = small_config(csv);
        config.set("features.method", method);
        config.set("features.k", "6");
        config.set("features.n_components", "4");
        config.set("hpo.enable", "off");
        config.set("explain.enable", "off");
        const PipelineResult result = run_pipeline(config, store);
        CHECK(store.read_run(result.run_id).status == RunStatus::finished);
    }
}

TEST_CASE("leakage: train-fitted plans ignore arbitrary test mutations") {
    const Dataset ds = testutil::make_binary_signal(200, 10, 5, 777);
    const SplitPlan split = split_holdout(ds, 0.8, 5, true);
    const Dataset train = ds.subset_rows(split.train_indices);

    PreprocessConfig pc;
    pc.remove_outliers = true;
    const PreprocessPlan plan_ref = fit_preprocessor(train, pc);

    std::vector<double> y(train.labels.begin(), train.labels.end());
    const LassoModel lasso_ref = fit_lasso(train.features, y, 0.01);
    const auto anova_ref = anova_f_scores(train.features, train.labels);

    Rng rng(31);
    for (int mutation = 0; mutation < 20; ++mutation) {
        Dataset mutated = ds;
        for (auto r : split.test_indices) {
            for (std::size_t c = 0; c < ds.n_cols(); ++c)
                if (rng.below(3) == 0) mutated.features(r, c) = rng.uniform(-50.0, 50.0);
            mutated.labels[r] = static_cast<int>(rng.below(2));
        }
        const Dataset train_again = mutated.subset_rows(split.train_indices);
        CHECK(fit_preprocessor(train_again, pc) == plan_ref);

        std::vector<double> y2(train_again.labels.begin(), train_again.labels.end());
        const LassoModel lasso2 = fit_lasso(train_again.features, y2, 0.01);
        CHECK(lasso2.beta == lasso_ref.beta);
        CHECK(anova_f_scores(train_again.features, train_again.labels) == anova_ref);
    }
}
