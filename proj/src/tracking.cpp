#include "automal/tracking.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "automal/error.hpp"

namespace automal {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::running: return "running";
        case RunStatus::finished: return "finished";
        case RunStatus::failed: return "failed";
    }
    return "unknown";
}

std::string content_hash_hex(const std::string& bytes) {
    // FNV-1a 64: integrity check against on-disk corruption, not crypto.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::optional<double> RunRecord::metric(const std::string& key) const {
    auto it = metrics.find(key);
    if (it == metrics.end() || it->second.empty()) return std::nullopt;
    return it->second.back().second;
}

namespace {

std::string now_iso8601() {
    std::time_t now = std::time(nullptr);
    std::tm tm_utc {};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// Advisory lock held for the lifetime of one append.
class LedgerLock {
public:
    explicit LedgerLock(const fs::path& path) {
        fd_ = ::open(path.c_str(), O_CREAT | O_WRONLY | O_APPEND, 0644);
        if (fd_ < 0) throw IoError("run store: cannot open ledger '" + path.string() + "'");
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw IoError("run store: cannot lock ledger");
        }
    }
    ~LedgerLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    void write(const std::string& line) {
        std::string payload = line + "\n";
        if (::write(fd_, payload.data(), payload.size()) !=
            static_cast<ssize_t>(payload.size()))
            throw IoError("run store: ledger append failed");
    }

private:
    int fd_ = -1;
};

}  // namespace

RunStore::RunStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "runs");
    if (!fs::exists(ledger_path())) {
        std::ofstream create{ledger_path()};
        if (!create) throw IoError("run store: cannot create ledger under '" +
                                   root_.string() + "'");
    }
}

void RunStore::append_line(const std::string& line) {
    LedgerLock lock(ledger_path());
    lock.write(line);
}

std::string RunStore::start_run(const std::string& config_json,
                                const std::string& parent_id) {
    // Unique id: wall time + per-process counter + random entropy.
    std::random_device rd;
    std::uint64_t entropy =
        (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
        static_cast<std::uint64_t>(
            std::chrono::steady_clock::now().time_since_epoch().count());
    char id[40];
    std::snprintf(id, sizeof id, "%08llx%08llx%06llx",
                  static_cast<unsigned long long>(std::time(nullptr)) & 0xffffffffULL,
                  static_cast<unsigned long long>(entropy & 0xffffffffULL),
                  static_cast<unsigned long long>(++counter_ & 0xffffffULL));

    json j;
    j["event"] = "start";
    j["run_id"] = id;
    j["time"] = now_iso8601();
    if (!parent_id.empty()) j["parent"] = parent_id;
    j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
    append_line(j.dump());
    fs::create_directories(root_ / "runs" / id / "artifacts");
    cache_[id] = CachedRun{};
    return id;
}

RunStore::CachedRun& RunStore::cached(const std::string& run_id) {
    auto it = cache_.find(run_id);
    if (it == cache_.end()) {
        const RunRecord rec = read_run(run_id);
        CachedRun c;
        c.status = rec.status;
        c.params = rec.params;
        it = cache_.emplace(run_id, std::move(c)).first;
    }
    return it->second;
}

void RunStore::log_param(const std::string& run_id, const std::string& key,
                         const std::string& value) {
    CachedRun& run = cached(run_id);
    if (run.status != RunStatus::running)
        throw Error("run store: run '" + run_id + "' is already " + to_string(run.status));
    if (auto it = run.params.find(key); it != run.params.end()) {
        if (it->second == value) return;  // idempotent re-log
        throw Error("run store: param '" + key + "' already logged with a different value");
    }
    json j;
    j["event"] = "param";
    j["run_id"] = run_id;
    j["key"] = key;
    j["value"] = value;
    append_line(j.dump());
    run.params[key] = value;
}

void RunStore::log_metric(const std::string& run_id, const std::string& key, double value,
                          int step) {
    if (CachedRun& run = cached(run_id); run.status != RunStatus::running)
        throw Error("run store: run '" + run_id + "' is already " + to_string(run.status));
    json j;
    j["event"] = "metric";
    j["run_id"] = run_id;
    j["key"] = key;
    j["value"] = value;
    j["step"] = step;
    append_line(j.dump());
}

ArtifactRef RunStore::log_artifact_text(const std::string& run_id, const std::string& name,
                                        const std::string& content) {
    if (CachedRun& run = cached(run_id); run.status != RunStatus::running)
        throw Error("run store: run '" + run_id + "' is already " + to_string(run.status));
    if (name.find('/') != std::string::npos || name.find("..") != std::string::npos)
        throw ValueError("run store: artifact name must be a plain filename");

    const fs::path rel = fs::path("runs") / run_id / "artifacts" / name;
    std::ofstream out(root_ / rel, std::ios::binary);
    if (!out) throw IoError("run store: cannot write artifact '" + name + "'");
    out << content;
    out.close();

    ArtifactRef ref{name, rel.string(), content_hash_hex(content)};
    json j;
    j["event"] = "artifact";
    j["run_id"] = run_id;
    j["name"] = ref.name;
    j["path"] = ref.relative_path;
    j["hash"] = ref.hash;
    append_line(j.dump());
    return ref;
}

ArtifactRef RunStore::log_artifact_file(const std::string& run_id, const std::string& name,
                                        const fs::path& source) {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw IoError("run store: cannot read artifact source '" + source.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return log_artifact_text(run_id, name, buf.str());
}

void RunStore::finish_run(const std::string& run_id, RunStatus status,
                          const std::string& failure_stage) {
    if (CachedRun& run = cached(run_id); run.status != RunStatus::running)
        throw Error("run store: run '" + run_id + "' is already " + to_string(run.status));
    if (status == RunStatus::running)
        throw ValueError("run store: finish_run needs a terminal status");
    json j;
    j["event"] = "finish";
    j["run_id"] = run_id;
    j["time"] = now_iso8601();
    j["status"] = to_string(status);
    if (!failure_stage.empty()) j["stage"] = failure_stage;
    append_line(j.dump());
    cache_[run_id].status = status;
}

RunRecord RunStore::read_run(const std::string& run_id) const {
    std::ifstream in(ledger_path());
    if (!in) throw IoError("run store: cannot open ledger");
    RunRecord rec;
    bool found = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.value("run_id", "") != run_id) continue;
        const std::string event = j.value("event", "");
        if (event == "start") {
            found = true;
            rec.id = run_id;
            rec.created_at = j.value("time", "");
            rec.parent_id = j.value("parent", "");
            rec.config_json = j["config"].dump();
            rec.status = RunStatus::running;
        } else if (event == "param") {
            rec.params[j.value("key", "")] = j.value("value", "");
        } else if (event == "metric") {
            rec.metrics[j.value("key", "")].emplace_back(j.value("step", 0),
                                                         j.value("value", 0.0));
        } else if (event == "artifact") {
            rec.artifacts.push_back(
                {j.value("name", ""), j.value("path", ""), j.value("hash", "")});
        } else if (event == "finish") {
            rec.status =
                j.value("status", "") == "finished" ? RunStatus::finished : RunStatus::failed;
            rec.failure_stage = j.value("stage", "");
        }
    }
    if (!found) throw Error("run store: unknown run id '" + run_id + "'");
    return rec;
}

std::vector<std::string> RunStore::list_run_ids() const {
    std::ifstream in(ledger_path());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.value("event", "") == "start") out.push_back(j.value("run_id", ""));
    }
    return out;
}

fs::path RunStore::artifact_path(const std::string& run_id, const std::string& name) const {
    return root_ / "runs" / run_id / "artifacts" / name;
}

std::string RunStore::read_artifact(const std::string& run_id,
                                    const std::string& name) const {
    const RunRecord rec = read_run(run_id);
    const ArtifactRef* ref = nullptr;
    for (const auto& a : rec.artifacts)
        if (a.name == name) ref = &a;
    if (!ref) throw Error("run store: run has no artifact '" + name + "'");

    std::ifstream in(root_ / ref->relative_path, std::ios::binary);
    if (!in) throw IoError("run store: artifact file missing: " + ref->relative_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    if (content_hash_hex(content) != ref->hash)
        throw IoError("run store: artifact '" + name + "' failed hash verification");
    return content;
}

ComparisonTable RunStore::compare_runs(const std::vector<std::string>& run_ids,
                                       const std::vector<std::string>& metric_keys) const {
    ComparisonTable table;
    table.columns = {"run_id", "status"};
    for (const auto& k : metric_keys) table.columns.push_back(k);
    for (const auto& id : run_ids) {
        const RunRecord rec = read_run(id);  // throws on unknown id
        std::vector<std::string> row = {id, to_string(rec.status)};
        for (const auto& k : metric_keys) {
            auto v = rec.metric(k);
            if (v) {
                std::ostringstream ss;
                ss.precision(17);
                ss << *v;
                row.push_back(ss.str());
            } else {
                row.emplace_back("");
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void ComparisonTable::sort_by(const std::string& metric_key, bool descending) {
    std::size_t col = columns.size();
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == metric_key) col = c;
    if (col == columns.size())
        throw ValueError("comparison: no column '" + metric_key + "'");
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
        const bool a_empty = a[col].empty(), b_empty = b[col].empty();
        if (a_empty != b_empty) return b_empty;  // missing values sink
        if (a_empty) return false;
        const double av = std::stod(a[col]), bv = std::stod(b[col]);
        return descending ? av > bv : av < bv;
    });
}

std::string ComparisonTable::to_csv() const {
    std::ostringstream out;
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            out << row[c] << (c + 1 < row.size() ? ',' : '\n');
    return out.str();
}

}  // namespace automal
