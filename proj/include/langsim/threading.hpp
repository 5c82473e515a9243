#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace langsim {

// Runs fn on contiguous index chunks [begin, end). Work is partitioned by
// index only, so any thread count produces the same result as a serial run
// provided fn touches disjoint state per index.
inline void parallel_for(int n, int threads, const std::function<void(int, int)>& fn) {
    if (threads <= 1 || n < 2 * threads) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int begin = t * chunk;
        int end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(fn, begin, end);
    }
    for (auto& th : pool) th.join();
}

}  // namespace langsim
