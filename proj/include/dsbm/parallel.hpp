#pragma once
// Static-partition parallel loop over [0, n). Tasks must be independent;
// determinism comes from per-task seeds, not scheduling order.

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace dsbm {

inline int default_workers() {
    if (const char* env = std::getenv("DSBM_WORKERS")) {
        int w = std::atoi(env);
        if (w >= 1) return w;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

template <typename Fn>
void parallel_for(int n, Fn&& fn, int workers = 0) {
    if (workers <= 0) workers = default_workers();
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace dsbm
