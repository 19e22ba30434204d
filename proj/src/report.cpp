#include "automal/report.hpp"

#include <algorithm>
#include <sstream>

#include "automal/error.hpp"

namespace automal {

namespace {

void embed_artifact(std::ostream& out, const RunStore& store, const RunRecord& rec,
                    const std::string& name, const char* language) {
    const ArtifactRef* ref = nullptr;
    for (const auto& a : rec.artifacts)
        if (a.name == name) ref = &a;
    if (!ref) {
        out << "_not recorded_\n\n";
        return;
    }
    const std::string content = store.read_artifact(rec.id, name);
    if (content.size() > 16 * 1024) {
        out << "stored at `" << ref->relative_path << "` (" << content.size()
            << " bytes)\n\n";
        return;
    }
    out << "```" << language << '\n' << content;
    if (content.empty() || content.back() != '\n') out << '\n';
    out << "```\n\n";
}

void param_table(std::ostream& out, const RunRecord& rec, const std::string& prefix) {
    bool any = false;
    for (const auto& [k, v] : rec.params) {
        if (k.rfind(prefix, 0) != 0) continue;
        if (!any) {
            out << "| key | value |\n|---|---|\n";
            any = true;
        }
        out << "| " << k << " | " << v << " |\n";
    }
    if (!any) out << "_none_\n";
    out << '\n';
}

}  // namespace

std::string render_report(const RunStore& store, const std::string& run_id) {
    const RunRecord rec = store.read_run(run_id);
    if (rec.status == RunStatus::running)
        throw Error("render_report: run '" + run_id + "' has not finished");

    std::ostringstream out;
    out.precision(17);
    out << "# Run " << rec.id << "\n\n";
    out << "- created: " << rec.created_at << '\n';
    out << "- status: " << to_string(rec.status) << '\n';
    if (!rec.parent_id.empty()) out << "- parent: " << rec.parent_id << '\n';
    if (!rec.failure_stage.empty()) out << "- failed stage: " << rec.failure_stage << '\n';
    out << '\n';

    out << "## Profile\n\n";
    embed_artifact(out, store, rec, "profile.json", "json");

    out << "## Environment\n\n";
    embed_artifact(out, store, rec, "environment.json", "json");

    out << "## Preprocessing\n\n";
    param_table(out, rec, "preprocess.");

    out << "## Feature Selection\n\n";
    param_table(out, rec, "features.");
    embed_artifact(out, store, rec, "selected_features.csv", "csv");

    out << "## Models\n\n";
    param_table(out, rec, "models.");

    out << "## Metrics\n\n";
    if (rec.metrics.empty()) {
        out << "_none_\n\n";
    } else {
        out << "| metric | value |\n|---|---|\n";
        for (const auto& [k, series] : rec.metrics)
            if (!series.empty()) out << "| " << k << " | " << series.back().second << " |\n";
        out << '\n';
    }

    out << "## Hyperparameters\n\n";
    param_table(out, rec, "best.");

    out << "## Explanations\n\n";
    embed_artifact(out, store, rec, "importance.csv", "csv");
    embed_artifact(out, store, rec, "attributions.csv", "csv");

    out << "## Resources\n\n";
    bool any_resource = false;
    for (const auto& [k, series] : rec.metrics) {
        if (k.rfind("time.", 0) != 0 && k.rfind("resource.", 0) != 0) continue;
        if (!any_resource) {
            out << "| probe | value |\n|---|---|\n";
            any_resource = true;
        }
        if (!series.empty()) out << "| " << k << " | " << series.back().second << " |\n";
    }
    if (!any_resource) out << "_none_\n";
    out << '\n';

    out << "## Artifacts\n\n";
    for (const auto& a : rec.artifacts)
        out << "- `" << a.relative_path << "` (" << a.hash << ")\n";
    if (rec.artifacts.empty()) out << "_none_\n";
    out << '\n';
    return out.str();
}

std::string render_comparison_report(const RunStore& store,
                                     const std::vector<std::string>& run_ids,
                                     const std::vector<std::string>& metric_keys) {
    ComparisonTable table = store.compare_runs(run_ids, metric_keys);
    std::ostringstream out;
    out << "# Run Comparison\n\n";
    out << '|';
    for (const auto& c : table.columns) out << ' ' << c << " |";
    out << "\n|";
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << "---|";
    out << '\n';
    for (const auto& row : table.rows) {
        out << '|';
        for (const auto& cell : row) out << ' ' << (cell.empty() ? "-" : cell) << " |";
        out << '\n';
    }
    out << '\n';
    return out.str();
}

}  // namespace automal
