#pragma once

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <cstddef>
#include <thread>
#include <vector>

namespace abx {

// Worker count: ABX_THREADS if set, else hardware_concurrency.
inline int thread_count() {
    static int n = [] {
        if (const char* env = std::getenv("ABX_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        unsigned hc = std::thread::hardware_concurrency();
        return hc ? int(hc) : 1;
    }();
    return n;
}

// Parallel loop over [0, n). Ranges are contiguous and writers stay disjoint,
// so results do not depend on the schedule.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    int nt = thread_count();
    if (nt <= 1 || n < 4096) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> ws;
    ws.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        ws.emplace_back([lo, hi, &f] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& w : ws) w.join();
}

// Dot products and norms are accumulated over fixed 4096-element blocks and the
// block sums are reduced in index order, so the result is one specific rounding
// of the sum regardless of thread count.
inline constexpr std::size_t det_block = 4096;

template <class T, class BlockOp>
auto blocked_reduce(std::size_t n, BlockOp&& op) -> T {
    std::size_t nblocks = (n + det_block - 1) / det_block;
    std::vector<T> partial(nblocks, T{});
    parallel_for(nblocks, [&](std::size_t b) {
        std::size_t lo = b * det_block, hi = std::min(n, lo + det_block);
        T acc{};
        for (std::size_t i = lo; i < hi; ++i) op(acc, i);
        partial[b] = acc;
    });
    T total{};
    for (std::size_t b = 0; b < nblocks; ++b) total += partial[b];
    return total;
}

inline std::complex<double> dot(const std::vector<std::complex<double>>& a,
                                const std::vector<std::complex<double>>& b) {
    return blocked_reduce<std::complex<double>>(a.size(), [&](std::complex<double>& acc, std::size_t i) {
        acc += std::conj(a[i]) * b[i];
    });
}

inline double norm2sq(const std::vector<std::complex<double>>& a) {
    return blocked_reduce<double>(a.size(), [&](double& acc, std::size_t i) { acc += std::norm(a[i]); });
}

} // namespace abx
