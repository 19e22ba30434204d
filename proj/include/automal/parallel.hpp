#pragma once

#include <cstddef>
#include <vector>

namespace automal {

// Thread-count policy for the OpenMP kernels. 0 means "hardware default".
// Every parallel kernel in the library writes each work item into its own
// output slot and reduces in fixed index order, so results are bit-identical
// for any thread count, including 1. The serial reference implementations in
// automal::ref exist to test exactly that.
void set_threads(int n);
int threads();
int hardware_threads();

namespace detail {
void parallel_for_impl(std::size_t n, void* ctx, void (*fn)(void*, std::size_t));
}

// Runs fn(i) for i in [0, n). fn must only touch state owned by item i.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
    detail::parallel_for_impl(n, &fn, [](void* ctx, std::size_t i) {
        (*static_cast<F*>(ctx))(i);
    });
}

// Deterministic sum of fn(i) over [0, n): fixed-size chunks are summed in
// parallel, then chunk partials are folded in index order. The result does
// not depend on the thread count.
inline constexpr std::size_t kReduceChunk = 2048;

template <typename F>
double parallel_sum(std::size_t n, F&& fn) {
    if (n == 0) return 0.0;
    const std::size_t n_chunks = (n + kReduceChunk - 1) / kReduceChunk;
    std::vector<double> partial(n_chunks, 0.0);
    parallel_for(n_chunks, [&](std::size_t c) {
        const std::size_t lo = c * kReduceChunk;
        const std::size_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += fn(i);
        partial[c] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace automal
