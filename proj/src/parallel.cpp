#include "automal/parallel.hpp"

#include <atomic>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace automal {

namespace {
std::atomic<int> g_threads{0};
}

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int hardware_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

int threads() {
    int n = g_threads.load();
    return n == 0 ? hardware_threads() : n;
}

namespace detail {

void parallel_for_impl(std::size_t n, void* ctx, void (*fn)(void*, std::size_t)) {
    const int nt = threads();
#ifdef _OPENMP
    if (nt > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(nt)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            fn(ctx, static_cast<std::size_t>(i));
        return;
    }
#else
    (void)nt;
#endif
    for (std::size_t i = 0; i < n; ++i) fn(ctx, i);
}

}  // namespace detail
}  // namespace automal
