#pragma once
// Deterministic parallel-for: contiguous index chunks, results written to
// per-index slots, so the outcome is identical for any worker count.

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace rfrecon {

// Worker count from RFRECON_WORKERS, default 1.
inline int worker_count() {
    if (const char* env = std::getenv("RFRECON_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

template <typename Fn>
void parallel_for(long n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    long chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        long lo = w * chunk;
        long hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn]() {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace rfrecon
