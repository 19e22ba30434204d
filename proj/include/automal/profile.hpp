#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "automal/dataset.hpp"

namespace automal {

// Exploratory summary of one dataset: dimensionality, missingness,
// duplicate feature rows, and class balance.
struct DatasetProfile {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> missing_fraction;  // per column, in [0,1]
    std::size_t duplicate_rows = 0;        // rows minus distinct feature rows
    // Duplicate feature rows whose labels disagree with the first occurrence.
    std::size_t label_conflicts = 0;
    std::size_t class_counts[2] = {0, 0};
    double imbalance_ratio = 1.0;  // majority / minority, >= 1
    std::size_t binary_cols = 0;
    std::size_t numeric_cols = 0;
    std::size_t categorical_cols = 0;

    std::string to_json() const;
};

DatasetProfile profile_dataset(const Dataset& ds);

// Host snapshot taken once per run. Probe failures leave a field flagged
// unavailable instead of raising.
struct EnvSnapshot {
    std::string os_name = "unavailable";
    std::string os_version = "unavailable";
    int cpu_count = 1;
    long long total_memory_bytes = 0;
    bool memory_available = false;
    std::string timestamp;  // ISO 8601 UTC
    // Network usage is deliberately not collected; the field documents that.
    std::string network_usage = "not collected";

    std::string to_json() const;
};

EnvSnapshot snapshot_environment();

}  // namespace automal
