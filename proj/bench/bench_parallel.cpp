// Wall-time comparison of the OpenMP kernels against their serial reference
// twins. Results are bit-identical by construction; this target measures the
// speedup only.
//
//   automal_bench [--threads N] [--rows N] [--cols N]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "automal/explain.hpp"
#include "automal/forest.hpp"
#include "automal/model.hpp"
#include "automal/parallel.hpp"
#include "automal/rng.hpp"
#include "automal/serial_ref.hpp"
#include "automal/trainers.hpp"

using namespace automal;

namespace {

Dataset synthetic(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.features = Matrix(rows, cols);
    ds.labels.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        ds.labels[r] = rng.uniform() < 0.4 ? 1 : 0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double p = c < cols / 3 ? (ds.labels[r] ? 0.7 : 0.3) : 0.4;
            ds.features(r, c) = rng.uniform() < p ? 1.0 : 0.0;
        }
    }
    ds.labels[0] = 0;
    ds.labels[rows - 1] = 1;
    for (std::size_t c = 0; c < cols; ++c) {
        ds.feature_names.push_back("f" + std::to_string(c));
        ds.feature_kinds.push_back(FeatureKind::binary);
        ds.levels.emplace_back();
    }
    return ds;
}

template <typename F>
double time_of(F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(const char* kernel, double serial, double parallel) {
    std::printf("%-28s %10.3fs %10.3fs %8.2fx\n", kernel, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
    int threads = hardware_threads();
    std::size_t rows = 4000, cols = 64;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--threads")) threads = std::atoi(argv[i + 1]);
        if (!std::strcmp(argv[i], "--rows")) rows = std::strtoull(argv[i + 1], nullptr, 10);
        if (!std::strcmp(argv[i], "--cols")) cols = std::strtoull(argv[i + 1], nullptr, 10);
    }

    const Dataset ds = synthetic(rows, cols, 1);
    std::printf("dataset %zux%zu, comparing serial reference vs %d threads\n\n", rows,
                cols, threads);
    std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

    ForestParams fp;
    fp.n_trees = 48;
    fp.seed = 3;
    ForestModel forest;
    {
        const double serial = time_of([&] {
            forest = ref::train_forest(ds.features, ds.labels, fp,
                                       ForestMode::random_forest);
        });
        set_threads(threads);
        ForestModel parallel_model;
        const double parallel = time_of([&] {
            parallel_model =
                train_forest(ds.features, ds.labels, fp, ForestMode::random_forest);
        });
        set_threads(0);
        report("forest train (48 trees)", serial, parallel);
    }

    ModelArtifact artifact;
    artifact.family = ModelFamily::random_forest;
    artifact.n_features = ds.n_cols();
    artifact.model = forest;
    {
        Matrix out_serial, out_parallel;
        const double serial =
            time_of([&] { out_serial = ref::predict_proba(artifact, ds.features); });
        set_threads(threads);
        const double parallel =
            time_of([&] { out_parallel = predict_proba(artifact, ds.features); });
        set_threads(0);
        report("batch predict", serial, parallel);
        if (!(out_serial == out_parallel)) std::printf("!! prediction mismatch\n");
    }

    {
        GbtParams gp;
        gp.n_rounds = 30;
        set_threads(1);
        GbtModel a;
        const double serial =
            time_of([&] { a = train_gbt(ds.features, ds.labels, gp); });
        set_threads(threads);
        GbtModel b;
        const double parallel =
            time_of([&] { b = train_gbt(ds.features, ds.labels, gp); });
        set_threads(0);
        report("gbt train (30 rounds)", serial, parallel);
        if (a.logloss_trace != b.logloss_trace) std::printf("!! gbt trace mismatch\n");
    }

    {
        const Dataset sub = ds.subset_rows([&] {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < std::min<std::size_t>(rows, 600); ++i)
                idx.push_back(i);
            return idx;
        }());
        ImportanceReport a, b;
        const double serial = time_of([&] {
            a = ref::permutation_importance(artifact, sub, ImportanceMetric::recall, 3, 7);
        });
        set_threads(threads);
        const double parallel = time_of([&] {
            b = permutation_importance(artifact, sub, ImportanceMetric::recall, 3, 7);
        });
        set_threads(0);
        report("permutation importance", serial, parallel);
        if (a.mean_drop != b.mean_drop) std::printf("!! importance mismatch\n");
    }

    {
        std::vector<std::size_t> bg_rows;
        for (std::size_t i = 0; i < 50; ++i) bg_rows.push_back(i);
        const Dataset background = ds.subset_rows(bg_rows);
        Attribution a, b;
        const double serial = time_of([&] {
            a = ref::shapley_sampled(artifact, ds.features.row(0), background, 500, 9);
        });
        set_threads(threads);
        const double parallel = time_of([&] {
            b = shapley_sampled(artifact, ds.features.row(0), background, 500, 9);
        });
        set_threads(0);
        report("sampled shapley (500)", serial, parallel);
        if (a.phi != b.phi) std::printf("!! shapley mismatch\n");
    }

    {
        auto term = [](std::size_t i) {
            const double x = static_cast<double>(i) * 1e-6;
            return std::sin(x) / (1.0 + x);
        };
        const std::size_t n = 50'000'000;
        double a = 0, b = 0;
        const double serial = time_of([&] { a = ref::sum(n, term); });
        set_threads(threads);
        const double parallel = time_of([&] { b = parallel_sum(n, term); });
        set_threads(0);
        report("chunked reduction (5e7)", serial, parallel);
        if (a != b) std::printf("!! reduction mismatch\n");
    }
    return 0;
}
