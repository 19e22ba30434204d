#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace automal {

enum class RunStatus { running, finished, failed };
const char* to_string(RunStatus s);

struct ArtifactRef {
    std::string name;
    std::string relative_path;  // under the store root
    std::string hash;           // fnv1a64:<hex> of the file content
};

// Materialized view of one run, folded from the ledger events.
struct RunRecord {
    std::string id;
    std::string created_at;
    std::string parent_id;
    RunStatus status = RunStatus::running;
    std::string config_json;  // full resolved pipeline config snapshot
    std::map<std::string, std::string> params;  // write-once per key
    // metrics keep every (step, value) append, latest value wins for views
    std::map<std::string, std::vector<std::pair<int, double>>> metrics;
    std::vector<ArtifactRef> artifacts;
    std::string failure_stage;

    std::optional<double> metric(const std::string& key) const;
};

struct ComparisonTable {
    std::vector<std::string> columns;  // "run_id", "status", then metric keys
    std::vector<std::vector<std::string>> rows;

    void sort_by(const std::string& metric_key, bool descending = true);
    std::string to_csv() const;
};

std::string content_hash_hex(const std::string& bytes);

// Append-only experiment store: a line-delimited JSON ledger plus one
// artifacts directory per run. Appends run under an advisory file lock;
// finished runs are immutable and artifact hashes verify on read.
//
// Layout: <root>/ledger.jsonl, <root>/runs/<run_id>/artifacts/<name>
class RunStore {
public:
    explicit RunStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    // Ledger gains a `running` entry; the id is unique per start.
    std::string start_run(const std::string& config_json,
                          const std::string& parent_id = "");

    // Params are write-once: re-logging an identical value is a no-op, a
    // different value is an error.
    void log_param(const std::string& run_id, const std::string& key,
                   const std::string& value);
    void log_metric(const std::string& run_id, const std::string& key, double value,
                    int step = 0);
    ArtifactRef log_artifact_text(const std::string& run_id, const std::string& name,
                                  const std::string& content);
    ArtifactRef log_artifact_file(const std::string& run_id, const std::string& name,
                                  const std::filesystem::path& source);
    void finish_run(const std::string& run_id, RunStatus status,
                    const std::string& failure_stage = "");

    RunRecord read_run(const std::string& run_id) const;
    std::vector<std::string> list_run_ids() const;

    // Verifies the stored hash before returning the bytes.
    std::string read_artifact(const std::string& run_id, const std::string& name) const;
    std::filesystem::path artifact_path(const std::string& run_id,
                                        const std::string& name) const;

    // Rows = runs, columns = status + requested metric keys (latest value);
    // missing values stay blank.
    ComparisonTable compare_runs(const std::vector<std::string>& run_ids,
                                 const std::vector<std::string>& metric_keys) const;

private:
    // Status/param snapshot for runs this instance touches, so appends do
    // not refold the whole ledger. Cross-process write-once enforcement is
    // best effort; the advisory lock only serializes the appends themselves.
    struct CachedRun {
        RunStatus status = RunStatus::running;
        std::map<std::string, std::string> params;
    };

    void append_line(const std::string& line);
    std::filesystem::path ledger_path() const { return root_ / "ledger.jsonl"; }
    CachedRun& cached(const std::string& run_id);

    std::filesystem::path root_;
    std::uint64_t counter_ = 0;
    std::map<std::string, CachedRun> cache_;
};

}  // namespace automal
