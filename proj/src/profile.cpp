#include "automal/profile.hpp"

#include <sys/utsname.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <ctime>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace automal {

namespace {

// Hashable key for a feature row; NaN canonicalized so equal-missing rows
// collide.
std::string row_key(const Matrix& m, std::size_t r) {
    std::string key(m.cols() * sizeof(double), '\0');
    const double* src = m.row_ptr(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double v = is_missing(src[c]) ? std::numeric_limits<double>::quiet_NaN() : src[c];
        if (v == 0.0) v = 0.0;  // collapse -0.0 and +0.0
        std::memcpy(key.data() + c * sizeof(double), &v, sizeof(double));
    }
    return key;
}

}  // namespace

DatasetProfile profile_dataset(const Dataset& ds) {
    if (ds.n_rows() == 0) throw ValueError("profile_dataset: empty dataset");
    DatasetProfile p;
    p.n_rows = ds.n_rows();
    p.n_cols = ds.n_cols();

    p.missing_fraction.assign(p.n_cols, 0.0);
    for (std::size_t c = 0; c < p.n_cols; ++c) {
        std::size_t miss = 0;
        for (std::size_t r = 0; r < p.n_rows; ++r)
            if (is_missing(ds.features(r, c))) ++miss;
        p.missing_fraction[c] = static_cast<double>(miss) / static_cast<double>(p.n_rows);
    }

    // Duplicate detection keys on feature values only; identical features
    // with conflicting labels are counted separately.
    std::unordered_map<std::string, int> first_label;
    first_label.reserve(p.n_rows * 2);
    for (std::size_t r = 0; r < p.n_rows; ++r) {
        auto [it, inserted] = first_label.try_emplace(row_key(ds.features, r), ds.labels[r]);
        if (!inserted) {
            ++p.duplicate_rows;
            if (it->second != ds.labels[r]) ++p.label_conflicts;
        }
    }

    for (int y : ds.labels) ++p.class_counts[y];
    const auto lo = std::min(p.class_counts[0], p.class_counts[1]);
    const auto hi = std::max(p.class_counts[0], p.class_counts[1]);
    p.imbalance_ratio = lo == 0 ? std::numeric_limits<double>::infinity()
                                : static_cast<double>(hi) / static_cast<double>(lo);

    for (auto k : ds.feature_kinds) {
        if (k == FeatureKind::binary) ++p.binary_cols;
        else if (k == FeatureKind::numeric) ++p.numeric_cols;
        else ++p.categorical_cols;
    }
    return p;
}

std::string DatasetProfile::to_json() const {
    nlohmann::json j;
    j["n_rows"] = n_rows;
    j["n_cols"] = n_cols;
    j["missing_fraction"] = missing_fraction;
    j["duplicate_rows"] = duplicate_rows;
    j["label_conflicts"] = label_conflicts;
    j["class_counts"] = {class_counts[0], class_counts[1]};
    j["imbalance_ratio"] = imbalance_ratio;
    j["column_kinds"] = {{"binary", binary_cols},
                         {"numeric", numeric_cols},
                         {"categorical", categorical_cols}};
    return j.dump(2);
}

EnvSnapshot snapshot_environment() {
    EnvSnapshot s;

    struct utsname un {};
    if (uname(&un) == 0) {
        s.os_name = un.sysname;
        s.os_version = un.release;
    }

    unsigned hc = std::thread::hardware_concurrency();
    s.cpu_count = hc == 0 ? 1 : static_cast<int>(hc);

    long pages = sysconf(_SC_PHYS_PAGES);
    long page_size = sysconf(_SC_PAGE_SIZE);
    if (pages > 0 && page_size > 0) {
        s.total_memory_bytes = static_cast<long long>(pages) * page_size;
        s.memory_available = true;
    }

    std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc {};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    s.timestamp = buf;
    return s;
}

std::string EnvSnapshot::to_json() const {
    nlohmann::json j;
    j["os_name"] = os_name;
    j["os_version"] = os_version;
    j["cpu_count"] = cpu_count;
    j["total_memory_bytes"] = memory_available ? nlohmann::json(total_memory_bytes)
                                               : nlohmann::json("unavailable");
    j["timestamp"] = timestamp;
    j["network_usage"] = network_usage;
    return j.dump(2);
}

}  // namespace automal
