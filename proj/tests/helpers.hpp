#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "automal/dataset.hpp"
#include "automal/rng.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("automal_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// Dataset straight from rows; kinds inferred (binary iff all values 0/1).
inline automal::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                     const std::vector<int>& labels) {
    automal::Dataset ds;
    const std::size_t n = rows.size();
    const std::size_t d = n == 0 ? 0 : rows[0].size();
    ds.features = automal::Matrix(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) ds.features(r, c) = rows[r][c];
    ds.labels = labels;
    for (std::size_t c = 0; c < d; ++c) {
        ds.feature_names.push_back("f" + std::to_string(c));
        bool binary = true;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = ds.features(r, c);
            if (!automal::is_missing(v) && v != 0.0 && v != 1.0) binary = false;
        }
        ds.feature_kinds.push_back(binary ? automal::FeatureKind::binary
                                          : automal::FeatureKind::numeric);
        ds.levels.emplace_back();
    }
    ds.source_id = "synthetic";
    return ds;
}

// Two linearly separable 2-D blobs with the given margin.
inline automal::Dataset make_blobs(std::size_t n_per_class, double margin,
                                   std::uint64_t seed) {
    automal::Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int cls = 0; cls < 2; ++cls) {
        const double center = cls == 0 ? -margin : margin;
        for (std::size_t i = 0; i < n_per_class; ++i) {
            // Box-Muller
            const double u1 = rng.uniform(1e-12, 1.0), u2 = rng.uniform();
            const double g1 = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
            const double g2 = std::sqrt(-2.0 * std::log(u1)) * std::sin(6.283185307179586 * u2);
            rows.push_back({center + 0.5 * g1, center + 0.5 * g2});
            labels.push_back(cls);
        }
    }
    return make_dataset(rows, labels);
}

// Binary feature matrix with planted signal: `informative` columns flip
// probability by class, the rest are noise. Mimics permission/API flag data.
inline automal::Dataset make_binary_signal(std::size_t n_rows, std::size_t n_cols,
                                           std::size_t informative, std::uint64_t seed,
                                           double class1_fraction = 0.4) {
    automal::Rng rng(seed);
    std::vector<std::vector<double>> rows(n_rows, std::vector<double>(n_cols, 0.0));
    std::vector<int> labels(n_rows, 0);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const int y = rng.uniform() < class1_fraction ? 1 : 0;
        labels[r] = y;
        for (std::size_t c = 0; c < n_cols; ++c) {
            double p = 0.3;
            if (c < informative) {
                const double strength = 0.80 - 0.04 * static_cast<double>(c % 5);
                p = y == 1 ? strength : 1.0 - strength;
            }
            rows[r][c] = rng.uniform() < p ? 1.0 : 0.0;
        }
    }
    // Guarantee both classes.
    labels[0] = 0;
    labels[n_rows - 1] = 1;
    return make_dataset(rows, labels);
}

inline std::string dataset_to_csv_text(const automal::Dataset& ds,
                                       const std::string& label_column = "class") {
    std::string out;
    for (const auto& n : ds.feature_names) out += n + ",";
    out += label_column + "\n";
    char buf[64];
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        for (std::size_t c = 0; c < ds.n_cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g,", ds.features(r, c));
            out += buf;
        }
        out += std::to_string(ds.labels[r]) + "\n";
    }
    return out;
}

}  // namespace testutil
