#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "automal/report.hpp"
#include "automal/tracking.hpp"
#include "helpers.hpp"

using namespace automal;
using testutil::TempDir;

namespace {

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("run store: first start yields one listed run") {
    TempDir dir("store1");
    RunStore store(dir.path() / "runs_root");
    const std::string id = store.start_run("{}");
    CHECK(store.list_run_ids() == std::vector<std::string>{id});
    CHECK(store.read_run(id).status == RunStatus::running);
}

TEST_CASE("run store: concurrent starts get distinct ids") {
    TempDir dir("store2");
    RunStore store(dir.path() / "r");
    const std::string a = store.start_run("{}");
    const std::string b = store.start_run("{}");
    CHECK(a != b);
    CHECK(store.list_run_ids().size() == 2);
}

TEST_CASE("run store: params are write-once") {
    TempDir dir("store3");
    RunStore store(dir.path() / "r");
    const std::string id = store.start_run("{}");
    store.log_param(id, "alpha", "1");
    store.log_param(id, "alpha", "1");  // same value: no-op
    CHECK_THROWS_AS(store.log_param(id, "alpha", "2"), Error);
    CHECK(store.read_run(id).params.at("alpha") == "1");
}

TEST_CASE("run store: metrics round-trip exactly") {
    TempDir dir("store4");
    RunStore store(dir.path() / "r");
    const std::string id = store.start_run("{}");
    store.log_metric(id, "recall", 0.985, 0);
    store.log_metric(id, "recall", 0.99125, 1);
    const RunRecord rec = store.read_run(id);
    REQUIRE(rec.metrics.at("recall").size() == 2);
    CHECK(rec.metrics.at("recall")[0] == std::pair<int, double>{0, 0.985});
    CHECK(rec.metrics.at("recall")[1] == std::pair<int, double>{1, 0.99125});
    CHECK(rec.metric("recall") == 0.99125);
}

TEST_CASE("run store: artifact corruption fails hash verification") {
    TempDir dir("store5");
    RunStore store(dir.path() / "r");
    const std::string id = store.start_run("{}");
    store.log_artifact_text(id, "table.csv", "a,b\n1,2\n");
    CHECK(store.read_artifact(id, "table.csv") == "a,b\n1,2\n");

    // flip one byte on disk
    const auto path = store.artifact_path(id, "table.csv");
    std::string bytes = read_bytes(path);
    bytes[0] = 'z';
    std::ofstream(path, std::ios::binary) << bytes;
    CHECK_THROWS_AS(store.read_artifact(id, "table.csv"), IoError);
}

TEST_CASE("run store: finished runs are immutable") {
    TempDir dir("store6");
    RunStore store(dir.path() / "r");
    const std::string id = store.start_run("{}");
    store.finish_run(id, RunStatus::finished);
    CHECK_THROWS_AS(store.log_param(id, "late", "1"), Error);
    CHECK_THROWS_AS(store.log_metric(id, "late", 1.0), Error);
    CHECK_THROWS_AS(store.log_artifact_text(id, "late.txt", "x"), Error);
    CHECK_THROWS_AS(store.finish_run(id, RunStatus::failed), Error);
}

TEST_CASE("run store: ledger is append-only") {
    TempDir dir("store7");
    RunStore store(dir.path() / "r");
    const auto ledger = dir.path() / "r" / "ledger.jsonl";

    const std::string id = store.start_run("{}");
    const std::string before = read_bytes(ledger);
    store.log_metric(id, "m", 1.0);
    store.log_param(id, "p", "v");
    store.finish_run(id, RunStatus::finished);
    const std::string after = read_bytes(ledger);
    REQUIRE(after.size() > before.size());
    CHECK(after.compare(0, before.size(), before) == 0);
}

TEST_CASE("run store: unknown ids are rejected") {
    TempDir dir("store8");
    RunStore store(dir.path() / "r");
    CHECK_THROWS_AS(store.read_run("nope"), Error);
    CHECK_THROWS_AS(store.compare_runs({"nope"}, {"recall"}), Error);
}

TEST_CASE("compare_runs: sorting and running-run inclusion") {
    TempDir dir("store9");
    RunStore store(dir.path() / "r");
    const std::string a = store.start_run("{}");
    store.log_metric(a, "recall", 0.90);
    store.finish_run(a, RunStatus::finished);
    const std::string b = store.start_run("{}");
    store.log_metric(b, "recall", 0.95);
    store.finish_run(b, RunStatus::finished);
    const std::string c = store.start_run("{}");  // still running

    ComparisonTable table = store.compare_runs({a, b, c}, {"recall"});
    table.sort_by("recall");
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0][0] == b);
    CHECK(table.rows[1][0] == a);
    CHECK(table.rows[2][0] == c);  // missing metric sinks
    CHECK(table.rows[2][1] == "running");
}

TEST_CASE("compare_runs: tools-by-datasets grid export") {
    TempDir dir("store10");
    RunStore store(dir.path() / "r");
    std::vector<std::string> ids;
    std::vector<std::string> keys;
    for (int d = 0; d < 9; ++d) keys.push_back("recall.ds" + std::to_string(d));
    for (int t = 0; t < 8; ++t) {
        const std::string id = store.start_run("{}");
        for (int d = 0; d < 9; ++d)
            store.log_metric(id, keys[static_cast<std::size_t>(d)], 0.5 + 0.05 * t);
        store.finish_run(id, RunStatus::finished);
        ids.push_back(id);
    }
    const ComparisonTable table = store.compare_runs(ids, keys);
    CHECK(table.rows.size() == 8);
    CHECK(table.columns.size() == 2 + 9);
    const std::string csv = table.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);  // header + 8 rows
}

TEST_CASE("run store: parent links child trials") {
    TempDir dir("store11");
    RunStore store(dir.path() / "r");
    const std::string parent = store.start_run("{}");
    std::vector<std::string> children;
    for (int i = 0; i < 5; ++i) {
        const std::string child = store.start_run("{}", parent);
        store.finish_run(child, RunStatus::finished);
        children.push_back(child);
    }
    std::size_t linked = 0;
    for (const auto& id : store.list_run_ids())
        if (store.read_run(id).parent_id == parent) ++linked;
    CHECK(linked == 5);
}

TEST_CASE("render_report: mandatory sections always present") {
    TempDir dir("store12");
    RunStore store(dir.path() / "r");
    const std::string id = store.start_run(R"({"seed":"42"})");
    store.log_metric(id, "recall", 0.97);
    store.log_param(id, "features.method_used", "lasso");
    store.log_artifact_text(id, "selected_features.csv", "feature,coefficient\napi_call,0.5\n");
    store.finish_run(id, RunStatus::finished);

    const std::string report = render_report(store, id);
    for (const char* section :
         {"## Profile", "## Environment", "## Preprocessing", "## Feature Selection",
          "## Models", "## Metrics", "## Hyperparameters", "## Explanations",
          "## Resources", "## Artifacts"})
        CHECK(report.find(section) != std::string::npos);
    // selected features cross-check against the stored artifact
    CHECK(report.find("api_call,0.5") != std::string::npos);
}

TEST_CASE("render_report: refuses a running run") {
    TempDir dir("store13");
    RunStore store(dir.path() / "r");
    const std::string id = store.start_run("{}");
    CHECK_THROWS_AS(render_report(store, id), Error);
}

TEST_CASE("render_comparison_report: one table row per run") {
    TempDir dir("store14");
    RunStore store(dir.path() / "r");
    std::vector<std::string> ids;
    for (int i = 0; i < 3; ++i) {
        const std::string id = store.start_run("{}");
        store.log_metric(id, "recall", 0.8 + 0.05 * i);
        store.finish_run(id, RunStatus::finished);
        ids.push_back(id);
    }
    const std::string doc = render_comparison_report(store, ids, {"recall"});
    std::size_t rows = 0;
    for (const auto& id : ids)
        if (doc.find(id) != std::string::npos) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("content hash: stable and sensitive") {
    const std::string h1 = content_hash_hex("abc");
    CHECK(h1 == content_hash_hex("abc"));
    CHECK(h1 != content_hash_hex("abd"));
    CHECK(h1.rfind("fnv1a64:", 0) == 0);
}
